"""Reference embedders the arithmetic-coding scheme is measured against."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .costs import flip_cost
from .errors import Infeasible, LengthMismatch, NoPath, SpecInvalid, TooLarge
from .keystream import StegoKey, keystream_uniform
from .solver import expected_distortion, solve_lambda
from .types import CostMap, Cover, ModificationPattern, ProbabilityModel, apply_pattern

LOG2_3 = math.log2(3.0)
SORT, SORT_EVEN = "SORT", "SORT_EVEN"


def sample_symbols(probs, uniforms) -> np.ndarray:
    """Inverse-CDF sampling of one symbol index per row; never picks p=0 entries."""
    p = np.asarray(probs)
    k = p.shape[1]
    cum = np.cumsum(p, axis=1)
    idx = (uniforms[:, None] >= cum).sum(axis=1)
    last_pos = k - 1 - np.argmax(p[:, ::-1] > 0, axis=1)
    idx = np.minimum(idx, last_pos)
    # skip over zero-probability entries that share a cumulative value
    bad = p[np.arange(p.shape[0]), idx] == 0
    while bad.any():
        idx[bad] += 1
        bad = p[np.arange(p.shape[0]), np.minimum(idx, k - 1)] == 0
    return idx


def simulate_optimal(cover: Cover, model: ProbabilityModel, key: StegoKey) -> Cover:
    """Draw each delta independently from its row of the real-valued model."""
    if model.n != len(cover):
        raise LengthMismatch("model and cover lengths differ")
    u = keystream_uniform(key.for_domain("sample"), 0, model.n)
    idx = sample_symbols(model.probs, u)
    deltas = np.asarray(model.deltas, dtype=np.int64)[idx]
    return apply_pattern(cover, ModificationPattern(deltas, model.deltas))


def _cheapest_order(costs: CostMap) -> np.ndarray:
    return np.argsort(flip_cost(costs), kind="stable")


def sort_selection(costs: CostMap, L: float, strategy: str):
    """Elements chosen by a distortion-sort strategy and their distribution.

    Returns ``(indices, probs)`` where ``probs`` rows cover only the selected
    elements.
    """
    order = _cheapest_order(costs)
    finite = np.isfinite(costs.costs)
    if strategy == SORT:
        k = int(math.ceil(L))
        if k > costs.n:
            raise Infeasible(f"SORT needs {k} elements, cover has {costs.n}")
        idx = order[:k]
        model = solve_lambda(costs.subset(idx), L)
        return idx, model.probs
    if strategy == SORT_EVEN:
        cap = np.cumsum(np.log2(finite[order].sum(axis=1)))
        if cap.size == 0 or cap[-1] < L:
            raise Infeasible(f"SORT_EVEN cannot reach {L} bits on this cover")
        k = int(np.searchsorted(cap, L - 1e-9)) + 1
        idx = order[:k]
        f = finite[idx]
        probs = f / f.sum(axis=1, keepdims=True)
        return idx, probs
    raise ValueError(f"unknown strategy {strategy!r}")


def sort_expected_distortion(costs: CostMap, L: float, strategy: str) -> float:
    idx, probs = sort_selection(costs, L, strategy)
    return expected_distortion(probs, costs.subset(idx))


def sort_full_probs(costs: CostMap, L: float, strategy: str) -> np.ndarray:
    """Sort-strategy distribution over the whole cover (no change elsewhere)."""
    idx, probs = sort_selection(costs, L, strategy)
    full = np.zeros_like(costs.costs)
    full[:, costs.zero_index] = 1.0
    full[idx] = probs
    return full


@dataclass(frozen=True, eq=False)
class StcSpec:
    """Banded parity-check matrix built from a small submatrix.

    Block ``b`` occupies rows ``b .. b+h-1`` (clipped at the last message row)
    and a run of consecutive columns. When ``cover_len`` is a multiple of
    ``message_len`` every block uses all ``sub_w`` columns; otherwise widths
    alternate between floor and ceil of the ratio and narrow blocks use the
    leading submatrix columns.
    """

    submatrix: np.ndarray
    message_len: int
    cover_len: int

    def __post_init__(self):
        H = np.array(self.submatrix, dtype=np.uint8)
        if H.ndim != 2 or H.size == 0 or not np.isin(H, (0, 1)).all():
            raise SpecInvalid("submatrix must be a nonempty binary matrix")
        h, w = H.shape
        if not 1 <= h <= 12:
            raise SpecInvalid("submatrix height must be between 1 and 12")
        if not (H[0].all() and H[-1].all()):
            raise SpecInvalid("first and last submatrix rows must be all ones")
        if self.message_len < 1 or self.cover_len < self.message_len:
            raise SpecInvalid("need 1 <= message_len <= cover_len")
        if self.widths().max() > w:
            raise SpecInvalid(f"blocks need {self.widths().max()} columns, submatrix has {w}")
        H.setflags(write=False)
        object.__setattr__(self, "submatrix", H)

    @property
    def sub_h(self):
        return self.submatrix.shape[0]

    @property
    def sub_w(self):
        return self.submatrix.shape[1]

    def widths(self) -> np.ndarray:
        m, n = self.message_len, self.cover_len
        b = np.arange(m + 1, dtype=np.int64)
        edges = (b * n) // m
        return np.diff(edges)

    def layout(self):
        """Per-column ``(block, position-in-block)`` arrays."""
        wd = self.widths()
        block = np.repeat(np.arange(self.message_len), wd)
        starts = np.concatenate([[0], np.cumsum(wd)[:-1]])
        pos = np.arange(self.cover_len) - starts[block]
        return block, pos

    def column_masks(self):
        """Column bitmasks relative to each column's block row, and block ends."""
        block, pos = self.layout()
        h = self.sub_h
        rows_left = self.message_len - block
        mask = np.zeros(self.cover_len, dtype=np.uint64)
        for r in range(h):
            bit = (self.submatrix[r, pos] == 1) & (r < rows_left)
            mask |= bit.astype(np.uint64) << np.uint64(r)
        end = np.zeros(self.cover_len, dtype=np.uint8)
        end[np.cumsum(self.widths()) - 1] = 1
        return mask, end

    def parity_matrix(self) -> np.ndarray:
        block, pos = self.layout()
        H = np.zeros((self.message_len, self.cover_len), dtype=np.uint8)
        for r in range(self.sub_h):
            rows = block + r
            ok = rows < self.message_len
            cols = np.nonzero(ok)[0]
            H[rows[ok], cols] = self.submatrix[r, pos[ok]]
        return H


def default_submatrix(h: int = 7, w: int = 2, seed: int = 0x5EED) -> np.ndarray:
    """Pseudorandom submatrix with all-ones first and last rows.

    Draws repeat until the columns are pairwise distinct (when that is
    possible); repeated columns waste trellis freedom and cost a lot of
    embedding efficiency.
    """
    rng = np.random.default_rng(seed)
    distinct = w <= 1 << max(h - 2, 0)
    while True:
        H = rng.integers(0, 2, size=(h, w), dtype=np.uint8)
        H[0] = 1
        H[-1] = 1
        if not distinct or len({H[:, j].tobytes() for j in range(w)}) == w:
            return H


def stc_spec_for(cover_len: int, message_len: int, h: int = 7, seed: int = 0x5EED) -> StcSpec:
    w = -(-cover_len // message_len)
    return StcSpec(default_submatrix(h, w, seed), message_len, cover_len)


def _bits(a, n=None, what="bits"):
    a = np.ascontiguousarray(a, dtype=np.uint8).ravel()
    if n is not None and a.size != n:
        raise LengthMismatch(f"{what}: expected {n}, got {a.size}")
    return a


def stc_embed(cover_bits, costs, spec: StcSpec, message, backend=None) -> np.ndarray:
    """Viterbi search for the cheapest stego bits in the message's coset."""
    x = _bits(cover_bits, spec.cover_len, "cover bits")
    m = _bits(message, spec.message_len, "message")
    rho = np.ascontiguousarray(costs, dtype=np.float64).ravel()
    if rho.size != spec.cover_len:
        raise LengthMismatch("costs must have one entry per cover bit")
    mask, end = spec.column_masks()
    y, cost = _backend.kernels(backend).stc_viterbi(x, rho, mask, end, m, spec.sub_h)
    if not np.isfinite(cost):
        raise NoPath("wet elements leave no stego in the message coset")
    return y


def stc_extract(stego_bits, spec: StcSpec) -> np.ndarray:
    y = _bits(stego_bits, spec.cover_len, "stego bits").astype(bool)
    block, pos = spec.layout()
    syn = np.zeros(spec.message_len + spec.sub_h, dtype=np.int64)
    for r in range(spec.sub_h):
        hit = y & (spec.submatrix[r, pos] == 1)
        np.add.at(syn, block[hit] + r, 1)
    return (syn[: spec.message_len] & 1).astype(np.uint8)


def brute_force_coset_leader(cover_bits, costs, H, message) -> np.ndarray:
    """Exhaustive minimum-cost member of ``{y : H y = message}``.

    Ties go to the lexicographically smallest ``y`` (first element most
    significant).
    """
    H = np.asarray(H, dtype=np.uint8)
    m, n = H.shape
    if n > 20:
        raise TooLarge(f"exhaustive search limited to n <= 20, got {n}")
    x = _bits(cover_bits, n, "cover bits")
    msg = _bits(message, m, "message")
    rho = np.asarray(costs, dtype=np.float64).ravel()
    col = (H.astype(np.int64) << np.arange(m, dtype=np.int64)[:, None]).sum(axis=0)
    target = int((msg.astype(np.int64) << np.arange(m)).sum())
    syn = np.zeros(1, dtype=np.int64)
    dist = np.zeros(1)
    # build with y[n-1] as the lowest index bit so index order is lexicographic
    for i in range(n - 1, -1, -1):
        c1 = rho[i] if x[i] == 0 else 0.0
        c0 = rho[i] if x[i] == 1 else 0.0
        syn = np.concatenate([syn, syn ^ col[i]])
        dist = np.concatenate([dist + c0, dist + c1])
    ok = np.nonzero(syn == target)[0]
    if ok.size == 0 or not np.isfinite(dist[ok]).any():
        raise NoPath("empty coset or every member touches a wet element")
    best = ok[np.argmin(dist[ok])]
    shifts = np.arange(n - 1, -1, -1)
    return ((best >> shifts) & 1).astype(np.uint8)


def stc_embed_cover(cover: Cover, costs: CostMap, message, h: int = 7, backend=None):
    """Binary STC on the cover's LSBs; each flip moves toward the cheaper side.

    Returns ``(stego, spec)``.
    """
    message = _bits(message)
    spec = stc_spec_for(len(cover), message.size, h)
    x = (cover.samples & 1).astype(np.uint8)
    rho = flip_cost(costs)
    y = stc_embed(x, rho, spec, message, backend)
    c = costs.costs
    direction = np.where(c[:, 0] <= c[:, -1], costs.deltas[0], costs.deltas[-1])
    deltas = np.where(y != x, direction, 0)
    return apply_pattern(cover, ModificationPattern(deltas, costs.deltas)), spec
