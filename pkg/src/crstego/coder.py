"""Embedding by arithmetic decoding, extraction by arithmetic encoding.

The sender treats the encrypted (and padded) message as the binary expansion
of a point in [0, 1) and reads off, element by element, the delta whose
sub-interval contains it. The receiver replays the same interval narrowing
from the observed deltas and emits the bits the interval has fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from ._pykernels import OK, PADDING_EXHAUSTED, PRECISION_COLLAPSE
from .errors import (
    ConfigError,
    InsufficientBits,
    ModelMismatch,
    PaddingExhausted,
    PatternOutOfRange,
    PrecisionCollapse,
)
from .types import (
    BitMessage,
    CoderConfig,
    Cover,
    ModificationPattern,
    ProbabilityModel,
    apply_pattern,
    diff_pattern,
)


@dataclass(frozen=True)
class CoderState:
    """Interval ``[low, high)`` in units of ``2**-beta``; ``high`` is exclusive."""

    low: int
    high: int
    beta: int = 32
    follow_count: int = 0
    bit_cursor: int = 0

    @classmethod
    def initial(cls, beta=32):
        return cls(0, 1 << beta, beta)

    @property
    def width(self):
        return self.high - self.low


def interval_step(state: CoderState, row, chosen: int, gamma: int = 16) -> CoderState:
    """Narrow the interval to the sub-interval of symbol index ``chosen``.

    ``row`` holds quantized counts in ascending-delta order summing to
    ``2**gamma``. No renormalization happens here.
    """
    row = [int(c) for c in row]
    if sum(row) != 1 << gamma:
        raise ConfigError("row counts must sum to 2**gamma")
    if row[chosen] < 1:
        raise PatternOutOfRange("chosen delta has zero count")
    below = sum(row[:chosen])
    through = below + row[chosen]
    w = state.width
    low = state.low + ((w * below) >> gamma)
    high = state.low + ((w * through) >> gamma)
    if not low < high:
        raise PrecisionCollapse("empty interval")
    return CoderState(low, high, state.beta, state.follow_count, state.bit_cursor)


def _check_model(n, model: ProbabilityModel, config: CoderConfig):
    if model.n != n:
        raise ModelMismatch(f"model has {model.n} rows, cover has {n} elements")
    if model.gamma != config.gamma:
        raise ModelMismatch(f"model quantized at gamma={model.gamma}, coder uses {config.gamma}")


def _raise_status(status, what):
    if status == PADDING_EXHAUSTED:
        raise PaddingExhausted(f"{what}: message bits ran out before the last element")
    if status == PRECISION_COLLAPSE:
        raise PrecisionCollapse(f"{what}: interval collapsed; check beta/gamma")
    if status != OK:
        raise RuntimeError(f"unknown kernel status {status}")


def embed_symbols(model: ProbabilityModel, bits, config: CoderConfig = CoderConfig(),
                  backend=None):
    k = _backend.kernels(backend)
    sym, consumed, status = k.embed_symbols(
        model.cumulative(), np.ascontiguousarray(bits, dtype=np.uint8),
        config.beta, config.gamma)
    _raise_status(status, "embed")
    return sym, int(consumed)


def embed(cover: Cover, model: ProbabilityModel, message: BitMessage,
          config: CoderConfig = CoderConfig(), backend=None):
    """Return ``(stego, consumed_bits)``.

    An empty message (zero payload, padding disabled) leaves the cover as is.
    """
    _check_model(len(cover), model, config)
    if len(message) == 0:
        return cover, 0
    if message.state != "encrypted_padded":
        raise ConfigError("embed expects an encrypted, padded message")
    sym, consumed = embed_symbols(model, message.bits, config, backend)
    deltas = np.asarray(model.deltas, dtype=np.int64)[sym]
    return apply_pattern(cover, ModificationPattern(deltas, model.deltas)), consumed


def pattern_symbols(pattern: ModificationPattern, model: ProbabilityModel) -> np.ndarray:
    if pattern.delta_set != model.deltas:
        raise ModelMismatch("pattern and model use different delta sets")
    sym = pattern.symbols().astype(np.int32)
    counts = model.quantized[np.arange(model.n), sym]
    if (counts == 0).any():
        i = int(np.argmin(counts))
        raise PatternOutOfRange(f"element {i} uses delta {pattern.deltas[i]}, which is wet here")
    return sym


def extract_symbols(model: ProbabilityModel, symbols, limit: int,
                    config: CoderConfig = CoderConfig(), backend=None):
    """Bits pinned down by ``symbols``: ``(bits[:limit], count)``; ``limit<0`` counts only."""
    k = _backend.kernels(backend)
    bits, count, status = k.extract_bits(
        model.cumulative(), np.ascontiguousarray(symbols, dtype=np.int32),
        config.beta, config.gamma, int(limit))
    _raise_status(status, "extract")
    return bits, int(count)


def determined_bits(model: ProbabilityModel, symbols, config: CoderConfig = CoderConfig(),
                    backend=None) -> int:
    """How many leading message bits a symbol sequence fixes."""
    return extract_symbols(model, symbols, -1, config, backend)[1]


def extract(stego: Cover, cover: Cover, model: ProbabilityModel, plaintext_len: int,
            config: CoderConfig = CoderConfig(), backend=None) -> BitMessage:
    _check_model(len(cover), model, config)
    pattern = diff_pattern(stego, cover, model.deltas)
    sym = pattern_symbols(pattern, model)
    if plaintext_len == 0:
        return BitMessage(np.zeros(0, np.uint8), state="encrypted")
    bits, count = extract_symbols(model, sym, plaintext_len, config, backend)
    if count < plaintext_len:
        raise InsufficientBits(
            f"pattern fixes only {count} of the {plaintext_len} requested bits")
    return BitMessage(bits, state="encrypted")


def padding_bound(model: ProbabilityModel, config: CoderConfig = CoderConfig()) -> int:
    """Message length that no embedding over ``model`` can exhaust.

    Each element shifts in at most its largest self-information, plus a
    flooring loss of under ``2**(gamma+3-beta)`` bits per element; the initial
    window holds ``beta`` bits.
    """
    q = model.quantized
    smallest = np.where(q > 0, q, 1 << model.gamma).min(axis=1)
    worst = float((model.gamma - np.log2(smallest)).sum())
    floor_loss = model.n * 2.0 ** (model.gamma + 3 - config.beta)
    return int(np.ceil(worst + floor_loss)) + config.beta + 64
