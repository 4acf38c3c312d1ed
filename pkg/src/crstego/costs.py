"""Adaptive ternary cost maps and their binary export format.

The image and audio models here are deliberately simple stand-ins for the
published distortion functions: they keep the adaptive character (cheap where
the signal is busy or, for the audio default, where it is predictable) and are
exact functions of the cover, which is all the coding layer relies on.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import (
    ConfigError,
    MaskOnZeroDelta,
    ParseError,
    ShapeMismatch,
    TooShort,
    WrongKind,
)
from .types import TERNARY, AudioKind, CostMap, Cover, ImageKind

HIGH_PASS = np.array([[-1, 2, -1], [2, -4, 2], [-1, 2, -1]], dtype=np.int64)

MAGIC = b"CRSC"
VERSION = 1
_HEADER = struct.Struct("<4sBBHQ")


def saturation_mask(cover: Cover, deltas=TERNARY) -> np.ndarray:
    """True where applying a delta would leave the cover's value range."""
    d = np.asarray(deltas, dtype=np.int64)[None, :]
    y = cover.samples[:, None] + d
    return (y < cover.value_min) | (y > cover.value_max)


def _ternary(cost_pm, cover=None):
    n = cost_pm.size
    c = np.stack([cost_pm, np.zeros(n), cost_pm], axis=1)
    if cover is not None:
        c[saturation_mask(cover)] = np.inf
    return CostMap(c, TERNARY)


def constant_cost(n: int, c: float = 1.0) -> CostMap:
    if n < 1 or not c > 0:
        raise ConfigError("need n >= 1 and c > 0")
    return _ternary(np.full(n, float(c)))


def _box3_sum(a):
    p = np.pad(a, 1, mode="symmetric")
    h, w = a.shape
    s = np.zeros_like(a)
    for dy in range(3):
        for dx in range(3):
            s += p[dy:dy + h, dx:dx + w]
    return s


def residual_energy(img) -> np.ndarray:
    """Local high-pass residual energy, computed in exact integer arithmetic.

    The image is filtered with a 3x3 high-pass kernel, the absolute residual is
    averaged over 3x3 windows, and the result is box-smoothed once more; the
    two 3x3 sums are accumulated as integers and divided by 81 at the end.
    """
    x = np.asarray(img, dtype=np.int64)
    p = np.pad(x, 1, mode="symmetric")
    h, w = x.shape
    r = np.zeros_like(x)
    for dy in range(3):
        for dx in range(3):
            k = HIGH_PASS[dy, dx]
            if k:
                r += k * p[dy:dy + h, dx:dx + w]
    return _box3_sum(_box3_sum(np.abs(r))) / 81.0


def texture_cost_image(cover: Cover) -> CostMap:
    if not isinstance(cover.kind, ImageKind):
        raise WrongKind("texture costs need an image cover")
    e = residual_energy(cover.as_image()).ravel()
    return _ternary(1.0 / (1.0 + e), cover)


def prediction_residual(samples, order: int = 2) -> np.ndarray:
    """Order-``order`` finite-difference residual of a 1-D signal.

    The first ``order`` positions have no full history and reuse the first
    complete residual, so a polynomial of degree < order has zero residual
    everywhere.
    """
    x = np.asarray(samples, dtype=np.int64)
    if x.size <= order:
        raise TooShort(f"need more than {order} samples")
    r = np.diff(x, n=order) if order > 0 else x.copy()
    return np.concatenate([np.full(order, r[0]), r])


def residual_cost_audio(cover: Cover, order: int = 2, polarity: str = "predictability") -> CostMap:
    """Per-sample ±1 costs from the linear-prediction residual.

    ``polarity="predictability"`` charges more for samples that are hard to
    predict: cost = (1 + |r|) / (1 + max|r|). ``polarity="texture"`` follows
    the image convention instead: cost = 1 / (1 + |r|).
    """
    if not isinstance(cover.kind, AudioKind):
        raise WrongKind("residual costs need an audio cover")
    a = np.abs(prediction_residual(cover.samples, order)).astype(np.float64)
    if polarity == "predictability":
        c = (1.0 + a) / (1.0 + a.max())
    elif polarity == "texture":
        c = 1.0 / (1.0 + a)
    else:
        raise ConfigError(f"unknown polarity {polarity!r}")
    return _ternary(c, cover)


def apply_wet(costs: CostMap, mask) -> CostMap:
    m = np.asarray(mask, dtype=bool)
    if m.shape != costs.costs.shape:
        raise ShapeMismatch(f"mask {m.shape} vs costs {costs.costs.shape}")
    if m[:, costs.zero_index].any():
        raise MaskOnZeroDelta("the no-change delta cannot be wet")
    c = costs.costs.copy()
    c[m] = np.inf
    return CostMap(c, costs.deltas)


def lsb_flip_costs(cover: Cover, costs: CostMap) -> CostMap:
    """Binary view of a ternary map: the LSB flip goes toward the cheaper side.

    Only one nonzero delta stays finite per element, so coding over the result
    is binary embedding (flip / keep) in the ternary representation.
    """
    if costs.deltas != TERNARY:
        raise ConfigError("lsb_flip_costs expects a ternary map")
    c = costs.costs
    down = c[:, 0] <= c[:, 2]
    out = np.full_like(c, np.inf)
    out[:, 1] = 0.0
    out[down, 0] = c[down, 0]
    out[~down, 2] = c[~down, 2]
    return CostMap(out, TERNARY)


def flip_cost(costs: CostMap) -> np.ndarray:
    """Cheapest finite nonzero delta cost per element (``inf`` if fully wet)."""
    c = costs.costs.copy()
    c[:, costs.zero_index] = np.inf
    return c.min(axis=1)


def save_costmap(costs: CostMap, path) -> None:
    k = len(costs.deltas)
    header = _HEADER.pack(MAGIC, VERSION, k, 0, costs.n)
    with open(path, "wb") as f:
        f.write(header)
        f.write(costs.costs.astype("<f8").tobytes())


def load_costmap(path, deltas=None) -> CostMap:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < _HEADER.size:
        raise ParseError("truncated cost map header", len(data))
    magic, version, k, _, n = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ParseError("bad magic", 0)
    if version != VERSION:
        raise ParseError(f"unsupported cost map version {version}", 4)
    if deltas is None:
        if k % 2 == 0:
            raise ParseError(f"{k} deltas cannot be inferred; pass deltas explicitly", 5)
        deltas = tuple(range(-(k // 2), k // 2 + 1))
    if len(deltas) != k:
        raise ParseError(f"file has {k} deltas, caller gave {len(deltas)}", 5)
    need = _HEADER.size + 8 * n * k
    if len(data) != need:
        raise ParseError(f"expected {need} bytes, found {len(data)}", min(len(data), need))
    c = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(n, k)
    return CostMap(c.astype(np.float64), deltas)


def cost_model(name: str, cover: Cover) -> CostMap:
    """Dispatch a negotiated cost-model name to its builder."""
    if name == "auto":
        name = "texture" if isinstance(cover.kind, ImageKind) else "residual"
    if name == "texture":
        return texture_cost_image(cover)
    if name == "residual":
        return residual_cost_audio(cover)
    if name == "residual-texture":
        return residual_cost_audio(cover, polarity="texture")
    if name == "constant":
        c = constant_cost(len(cover))
        return apply_wet(c, saturation_mask(cover))
    raise ConfigError(f"unknown cost model {name!r}")


COST_MODELS = ("auto", "texture", "residual", "residual-texture", "constant")
