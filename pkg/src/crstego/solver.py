"""Gibbs-optimal modification distributions under a payload constraint."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllWet, ConfigError, Infeasible, NotConverged, ShapeMismatch
from .types import CostMap, ProbabilityModel

LN2 = math.log(2.0)


@dataclass(frozen=True)
class PayloadSpec:
    target_bits: float
    relative_tolerance: float = 1e-9
    max_iterations: int = 96

    def __post_init__(self):
        if not self.target_bits > 0:
            raise ConfigError("payload must be positive")
        if not self.relative_tolerance > 0 or self.max_iterations < 1:
            raise ConfigError("tolerance and iteration budget must be positive")


def gibbs_row(costs_row, lam: float) -> np.ndarray:
    c = np.asarray(costs_row, dtype=np.float64)
    finite = np.isfinite(c)
    if not finite.any():
        raise AllWet("every delta of this element is wet")
    if lam < 0:
        raise ConfigError("lambda must be nonnegative")
    a = np.where(finite, -lam * np.where(finite, c, 0.0), -np.inf)
    w = np.exp(a - a[finite].max())
    return w / w.sum()


def gibbs(costs: CostMap, lam: float) -> np.ndarray:
    """Row-wise Gibbs distribution; wet deltas get exactly zero."""
    c = costs.costs
    finite = np.isfinite(c)
    if not finite.any(axis=1).all():
        raise AllWet("an element has no finite-cost delta")
    cz = np.where(finite, c, 0.0)
    # the no-change delta costs 0, so the row maximum of -lam*c is exactly 0
    w = np.where(finite, np.exp(-lam * cz), 0.0)
    return w / w.sum(axis=1, keepdims=True)


def _entropy_at(cz, finite, lam):
    # H = log2 Z + lam * E[c] / ln 2, evaluated without forming the probabilities.
    # Inputs are delta-major (k, n) so the row sums are plain vector adds.
    w = np.exp(-lam * cz)
    w *= finite
    z = w.sum(axis=0)
    w *= cz
    return float(np.log2(z).sum() + lam * (w.sum(axis=0) / z).sum() / LN2)


def row_entropy(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    safe = np.where(p > 0, p, 1.0)
    return -(p * np.log2(safe)).sum(axis=-1)


def total_entropy(model) -> float:
    probs = model.probs if isinstance(model, ProbabilityModel) else model
    return float(row_entropy(probs).sum())


def expected_distortion(model, costs: CostMap) -> float:
    probs = model.probs if isinstance(model, ProbabilityModel) else np.asarray(model)
    if probs.shape != costs.costs.shape:
        raise ShapeMismatch(f"model {probs.shape} vs costs {costs.costs.shape}")
    c = np.where(probs > 0, costs.costs, 0.0)
    return float((probs * c).sum())


def quantize(probs, gamma: int = 16) -> np.ndarray:
    """Largest-remainder apportionment of each row onto ``2**gamma`` counts.

    Nonzero probabilities are floored at one count; ties go to the lower
    delta. Any excess created by the floor is taken from the row's largest
    count, which always has room to spare.
    """
    p = np.asarray(probs, dtype=np.float64)
    total = 1 << gamma
    raw = p * total
    base = np.floor(raw).astype(np.int64)
    base[(p > 0) & (base == 0)] = 1
    rem = np.where(p > 0, raw - base, -np.inf)
    deficit = total - base.sum(axis=1)
    order = np.argsort(-rem, axis=1, kind="stable")
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.arange(p.shape[1])[None, :].repeat(p.shape[0], 0), axis=1)
    base += (rank < deficit[:, None]).astype(np.int64)
    excess = np.maximum(-deficit, 0)
    if excess.any():
        top = np.argmax(base, axis=1)
        base[np.arange(p.shape[0]), top] -= excess
    return base


def make_model(costs: CostMap, lam: float, gamma: int = 16) -> ProbabilityModel:
    probs = gibbs(costs, lam)
    return ProbabilityModel(probs, float(lam), quantize(probs, gamma), gamma, costs.deltas)


def certain_model(n: int, deltas=(-1, 0, 1), gamma: int = 16) -> ProbabilityModel:
    """Model that forces the no-change delta everywhere (zero payload)."""
    probs = np.zeros((n, len(deltas)))
    probs[:, list(deltas).index(0)] = 1.0
    return ProbabilityModel(probs, math.inf, (probs * (1 << gamma)).astype(np.int64),
                            gamma, deltas)


def solve_lambda(costs: CostMap, payload, gamma: int = 16) -> ProbabilityModel:
    """Find lambda with total entropy equal to the payload, by bisection.

    The bracket is grown by doubling from 1; bisection then halves it at dyadic
    midpoints until they stop moving or the iteration budget runs out. The
    lower end (entropy >= target) is returned.
    """
    if not isinstance(payload, PayloadSpec):
        payload = PayloadSpec(float(payload))
    target = payload.target_bits
    finite = np.isfinite(costs.costs)
    if not finite.any(axis=1).all():
        raise AllWet("an element has no finite-cost delta")
    capacity = costs.capacity_bits()
    if target >= capacity:
        raise Infeasible(f"payload {target:.6g} bits >= capacity {capacity:.6g} bits")
    cz = np.ascontiguousarray(np.where(finite, costs.costs, 0.0).T)
    finite = np.ascontiguousarray(finite.T, dtype=np.float64)

    hi = 1.0
    doublings = 0
    while _entropy_at(cz, finite, hi) >= target:
        hi *= 2.0
        doublings += 1
        if doublings > 64:
            raise NotConverged("could not bracket lambda", _entropy_at(cz, finite, hi))
    lo = 0.0
    for _ in range(payload.max_iterations):
        mid = (lo + hi) * 0.5
        if mid == lo or mid == hi:
            break
        if _entropy_at(cz, finite, mid) >= target:
            lo = mid
        else:
            hi = mid
    achieved = _entropy_at(cz, finite, lo)
    if abs(achieved - target) > payload.relative_tolerance * target:
        # zero-cost deltas can make entropy flat in lambda; fall back to whichever end is closer
        alt = _entropy_at(cz, finite, hi)
        if abs(alt - target) <= payload.relative_tolerance * target:
            lo, achieved = hi, alt
        else:
            raise NotConverged(
                f"entropy {achieved:.12g} misses target {target:.12g}", achieved)
    return make_model(costs, lo, gamma)


def selfinfo_moments(model: ProbabilityModel, quantized: bool = True):
    """Mean and variance of the pattern's self-information (bits).

    The self-information of a sampled pattern is a sum of independent row
    terms, so both moments are additive over rows.
    """
    p = model.quantized_probs() if quantized else model.probs
    x = -np.log2(np.where(p > 0, p, 1.0))
    m1 = (p * x).sum(axis=1)
    m2 = (p * x * x).sum(axis=1)
    return float(m1.sum()), float(np.maximum(m2 - m1 * m1, 0.0).sum())


def quantization_kl(model: ProbabilityModel) -> np.ndarray:
    """Per-row KL divergence (bits) from the real model to its quantization."""
    p = model.probs
    q = model.quantized_probs()
    ratio = np.where(p > 0, p / np.where(q > 0, q, 1.0), 1.0)
    return (p * np.log2(ratio)).sum(axis=1)
