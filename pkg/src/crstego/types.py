"""Core data model shared across the package."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from .errors import (
    ConfigError,
    LengthMismatch,
    PatternOutOfRange,
    RangeViolation,
    ShapeMismatch,
)

TERNARY = (-1, 0, 1)


@dataclass(frozen=True)
class ImageKind:
    width: int
    height: int


@dataclass(frozen=True)
class AudioKind:
    sample_rate_hz: int


@dataclass(frozen=True)
class RawKind:
    pass


Kind = Union[ImageKind, AudioKind, RawKind]


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Cover:
    """Integer carrier signal (image pixels in raster order, or audio samples)."""

    samples: np.ndarray
    value_min: int
    value_max: int
    kind: Kind = field(default_factory=RawKind)

    def __post_init__(self):
        s = _frozen(self.samples, np.int64).ravel()
        object.__setattr__(self, "samples", s)
        if s.size < 1:
            raise ConfigError("cover must hold at least one sample")
        if self.value_min > self.value_max:
            raise ConfigError("value_min exceeds value_max")
        if s.min() < self.value_min or s.max() > self.value_max:
            raise RangeViolation(
                f"samples outside [{self.value_min}, {self.value_max}]")
        if isinstance(self.kind, ImageKind):
            if self.kind.width * self.kind.height != s.size:
                raise ShapeMismatch(
                    f"image {self.kind.width}x{self.kind.height} needs "
                    f"{self.kind.width * self.kind.height} samples, got {s.size}")

    def __len__(self):
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, Cover):
            return NotImplemented
        return (self.kind == other.kind
                and self.value_min == other.value_min
                and self.value_max == other.value_max
                and np.array_equal(self.samples, other.samples))

    @property
    def n(self) -> int:
        return self.samples.size

    def as_image(self) -> np.ndarray:
        if not isinstance(self.kind, ImageKind):
            raise ConfigError("cover is not an image")
        return self.samples.reshape(self.kind.height, self.kind.width)

    def with_samples(self, samples) -> "Cover":
        return Cover(samples, self.value_min, self.value_max, self.kind)


@dataclass(frozen=True, eq=False)
class ModificationPattern:
    deltas: np.ndarray
    delta_set: Tuple[int, ...] = TERNARY

    def __post_init__(self):
        d = _frozen(self.deltas, np.int64).ravel()
        object.__setattr__(self, "deltas", d)
        object.__setattr__(self, "delta_set", tuple(int(v) for v in self.delta_set))
        if d.size and not np.isin(d, self.delta_set).all():
            raise PatternOutOfRange("pattern contains deltas outside the admissible set")

    def __len__(self):
        return self.deltas.size

    def __eq__(self, other):
        if not isinstance(other, ModificationPattern):
            return NotImplemented
        return self.delta_set == other.delta_set and np.array_equal(self.deltas, other.deltas)

    def symbols(self) -> np.ndarray:
        """Column index of each delta within ``delta_set``."""
        return np.searchsorted(np.asarray(self.delta_set), self.deltas)


@dataclass(frozen=True, eq=False)
class CostMap:
    """Per-element, per-delta modification costs; ``inf`` marks a wet delta."""

    costs: np.ndarray
    deltas: Tuple[int, ...] = TERNARY

    def __post_init__(self):
        deltas = tuple(int(v) for v in self.deltas)
        object.__setattr__(self, "deltas", deltas)
        if list(deltas) != sorted(set(deltas)) or 0 not in deltas:
            raise ConfigError("deltas must be strictly ascending and include 0")
        c = _frozen(self.costs, np.float64)
        if c.ndim != 2 or c.shape[1] != len(deltas):
            raise ShapeMismatch(f"costs must be (n, {len(deltas)}), got {c.shape}")
        if np.isnan(c).any() or (c < 0).any() or np.isneginf(c).any():
            raise ConfigError("costs must be nonnegative (inf allowed for wet deltas)")
        if (c[:, self.zero_index] != 0).any():
            raise ConfigError("the no-change delta must cost 0")
        object.__setattr__(self, "costs", c)

    @property
    def zero_index(self) -> int:
        return self.deltas.index(0)

    @property
    def n(self) -> int:
        return self.costs.shape[0]

    def __len__(self):
        return self.costs.shape[0]

    def wet(self) -> np.ndarray:
        return np.isinf(self.costs)

    def capacity_bits(self) -> float:
        """Largest payload the map can carry: sum of log2(#finite deltas)."""
        return float(np.log2((~self.wet()).sum(axis=1)).sum())

    def subset(self, index) -> "CostMap":
        return CostMap(self.costs[index], self.deltas)


@dataclass(frozen=True, eq=False)
class ProbabilityModel:
    """Gibbs modification distribution and its fixed-point quantization.

    ``quantized`` rows sum to ``2**gamma``; both coding directions use only the
    integer counts so floating-point round-off cannot desynchronize them.
    """

    probs: np.ndarray
    lam: float
    quantized: np.ndarray
    gamma: int
    deltas: Tuple[int, ...] = TERNARY

    def __post_init__(self):
        p = _frozen(self.probs, np.float64)
        q = _frozen(self.quantized, np.int64)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "quantized", q)
        object.__setattr__(self, "deltas", tuple(int(v) for v in self.deltas))
        if p.shape != q.shape or p.ndim != 2 or p.shape[1] != len(self.deltas):
            raise ShapeMismatch("probs and quantized must share shape (n, |I|)")
        if not np.all(q.sum(axis=1) == (1 << self.gamma)):
            raise ConfigError("quantized rows must sum to 2**gamma")
        if ((p > 0) & (q < 1)).any() or ((p == 0) & (q != 0)).any():
            raise ConfigError("quantized support must match the real support")

    @property
    def n(self) -> int:
        return self.probs.shape[0]

    def __len__(self):
        return self.probs.shape[0]

    def quantized_probs(self) -> np.ndarray:
        return self.quantized / float(1 << self.gamma)

    def cumulative(self) -> np.ndarray:
        """(n, |I|+1) cumulative counts in ascending-delta order, starting at 0."""
        cum = np.zeros((self.n, len(self.deltas) + 1), dtype=np.int64)
        np.cumsum(self.quantized, axis=1, out=cum[:, 1:])
        return cum


BIT_STATES = ("plaintext", "encrypted", "encrypted_padded")


@dataclass(frozen=True, eq=False)
class BitMessage:
    bits: np.ndarray
    plaintext_len: Optional[int] = None
    state: str = "plaintext"

    def __post_init__(self):
        b = _frozen(self.bits, np.uint8).ravel()
        if b.size and b.max() > 1:
            raise ConfigError("bits must be 0 or 1")
        object.__setattr__(self, "bits", b)
        if self.plaintext_len is None:
            object.__setattr__(self, "plaintext_len", int(b.size))
        if self.state not in BIT_STATES:
            raise ConfigError(f"unknown message state {self.state!r}")
        if self.plaintext_len < 0 or self.plaintext_len > b.size:
            raise ConfigError("plaintext_len must lie within the bit length")
        if self.state != "encrypted_padded" and self.plaintext_len != b.size:
            raise ConfigError("only padded messages may carry bits beyond plaintext_len")

    def __len__(self):
        return self.bits.size

    def __eq__(self, other):
        if not isinstance(other, BitMessage):
            return NotImplemented
        return (self.state == other.state and self.plaintext_len == other.plaintext_len
                and np.array_equal(self.bits, other.bits))

    def head(self) -> np.ndarray:
        return self.bits[: self.plaintext_len]

    @classmethod
    def from_bytes(cls, data: bytes, nbits: Optional[int] = None, state="plaintext"):
        bits = np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))
        if nbits is not None:
            if nbits > bits.size:
                raise ConfigError(f"need {nbits} bits, only {bits.size} available")
            bits = bits[:nbits]
        return cls(bits, state=state)

    def to_bytes(self) -> bytes:
        return np.packbits(self.head()).tobytes()


@dataclass(frozen=True)
class CoderConfig:
    beta: int = 32
    gamma: int = 16

    def __post_init__(self):
        if self.beta < self.gamma + 4:
            raise ConfigError("beta must be at least gamma + 4")
        if not (1 <= self.gamma <= 30) or self.beta > 64:
            raise ConfigError("supported ranges: 1 <= gamma <= 30, beta <= 64")


def apply_pattern(cover: Cover, pattern: ModificationPattern) -> Cover:
    if len(pattern) != len(cover):
        raise LengthMismatch(f"pattern length {len(pattern)} != cover length {len(cover)}")
    y = cover.samples + pattern.deltas
    bad = (y < cover.value_min) | (y > cover.value_max)
    if bad.any():
        i = int(np.argmax(bad))
        raise RangeViolation(
            f"element {i}: {cover.samples[i]} + {pattern.deltas[i]} leaves "
            f"[{cover.value_min}, {cover.value_max}]")
    return cover.with_samples(y)


def diff_pattern(stego: Cover, cover: Cover, delta_set=TERNARY) -> ModificationPattern:
    if len(stego) != len(cover):
        raise LengthMismatch(f"stego length {len(stego)} != cover length {len(cover)}")
    if stego.kind != cover.kind:
        raise LengthMismatch("stego and cover kinds differ")
    e = stego.samples - cover.samples
    ok = np.isin(e, delta_set)
    if not ok.all():
        i = int(np.argmin(ok))
        raise PatternOutOfRange(
            f"element {i}: delta {e[i]} not in {tuple(delta_set)} "
            "(wrong cover seed or corrupted stego)")
    return ModificationPattern(e, delta_set)


def distortion(costs: CostMap, pattern: ModificationPattern) -> float:
    """Additive distortion of a pattern; infinite if it touches a wet delta."""
    if len(pattern) != len(costs):
        raise LengthMismatch("pattern and cost map lengths differ")
    idx = np.searchsorted(np.asarray(costs.deltas), pattern.deltas)
    return float(costs.costs[np.arange(len(costs)), idx].sum())
