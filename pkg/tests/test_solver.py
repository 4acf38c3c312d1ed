import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_costs, ternary_map
from crstego.costs import apply_wet, constant_cost
from crstego.errors import AllWet, Infeasible
from crstego.solver import (
    LN2,
    expected_distortion,
    gibbs,
    gibbs_row,
    make_model,
    quantization_kl,
    quantize,
    row_entropy,
    selfinfo_moments,
    solve_lambda,
    total_entropy,
)
from crstego.types import TERNARY, CostMap


def unit_entropy_oracle(lam):
    """Entropy (bits) of one element with costs (1, 0, 1) at multiplier lam."""
    a = math.exp(-lam)
    z = 1 + 2 * a
    p1, p0 = a / z, 1 / z
    return -(2 * p1 * math.log2(p1) + p0 * math.log2(p0))


def bisect_oracle(f, target, lo=0.0, hi=50.0):
    # plain scalar bisection on a decreasing function
    for _ in range(200):
        mid = (lo + hi) / 2
        if f(mid) >= target:
            lo = mid
        else:
            hi = mid
    return lo


def test_gibbs_row_examples():
    np.testing.assert_allclose(gibbs_row([1, 0, 1], 0.0), [1 / 3] * 3, atol=1e-15)
    np.testing.assert_allclose(gibbs_row([1, 0, 1], LN2), [0.25, 0.5, 0.25], atol=1e-15)
    np.testing.assert_allclose(gibbs_row([np.inf, 0, 1], LN2), [0, 2 / 3, 1 / 3], atol=1e-15)
    with pytest.raises(AllWet):
        gibbs_row([np.inf, np.inf, np.inf], 1.0)


def test_gibbs_matrix_matches_rows():
    rng = np.random.default_rng(3)
    c = random_costs(rng, 50, wet_frac=0.2)
    g = gibbs(c, 1.7)
    for i in range(50):
        np.testing.assert_allclose(g[i], gibbs_row(c.costs[i], 1.7), atol=1e-15)
    assert (g[c.wet()] == 0).all()


def test_entropy_examples():
    assert total_entropy(np.array([[0.25, 0.5, 0.25]])) == pytest.approx(1.5, abs=1e-15)
    assert total_entropy(np.array([[0.0, 1.0, 0.0]])) == 0.0
    assert total_entropy(np.full((7, 3), 1 / 3)) == pytest.approx(7 * math.log2(3))


def test_expected_distortion_examples():
    one = ternary_map([1.0])
    assert expected_distortion(np.array([[0.25, 0.5, 0.25]]), one) == pytest.approx(0.5)
    many = ternary_map(np.ones(10))
    assert expected_distortion(np.tile([0.25, 0.5, 0.25], (10, 1)), many) == pytest.approx(5.0)
    assert expected_distortion(np.tile([0.0, 1.0, 0.0], (10, 1)), many) == 0.0


def test_expected_distortion_ignores_wet_cells():
    c = CostMap(np.array([[np.inf, 0.0, 1.0]]), TERNARY)
    assert expected_distortion(np.array([[0.0, 0.5, 0.5]]), c) == pytest.approx(0.5)


def test_solve_closed_form():
    m = solve_lambda(constant_cost(1000), 1500)
    assert abs(m.lam - math.log(2)) < 1e-6
    np.testing.assert_allclose(m.probs, np.tile([0.25, 0.5, 0.25], (1000, 1)), atol=1e-9)
    assert m.quantized[0].tolist() == [16384, 32768, 16384]


def test_solve_matches_scalar_oracle():
    lam_ref = bisect_oracle(unit_entropy_oracle, 0.5)
    m = solve_lambda(constant_cost(400), 200)
    assert abs(m.lam - lam_ref) < 1e-6
    assert total_entropy(m) == pytest.approx(200, rel=1e-9)


def test_near_capacity_is_near_uniform():
    n = 100
    m = solve_lambda(constant_cost(n), n * math.log2(3) * (1 - 1e-7))
    assert m.lam < 1e-2
    np.testing.assert_allclose(m.probs, 1 / 3, atol=1e-3)


def test_at_capacity_is_infeasible():
    with pytest.raises(Infeasible):
        solve_lambda(constant_cost(10), 10 * math.log2(3))


def test_fully_wet_is_infeasible():
    c = constant_cost(5)
    mask = np.zeros((5, 3), bool)
    mask[:, [0, 2]] = True
    wet = apply_wet(c, mask)
    assert wet.capacity_bits() == 0
    with pytest.raises(Infeasible):
        solve_lambda(wet, 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.05, 1.4))
def test_solver_hits_target(seed, rate):
    rng = np.random.default_rng(seed)
    c = random_costs(rng, 64, wet_frac=0.1)
    L = rate * c.capacity_bits() / math.log2(3)
    if L >= c.capacity_bits():
        return
    m = solve_lambda(c, L)
    assert total_entropy(m) == pytest.approx(L, rel=1e-9)
    assert total_entropy(m) >= L * (1 - 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gibbs_beats_any_distribution_of_equal_entropy(seed):
    # variational inequality: E_q[D] - H(q) ln2/lam >= E_pi[D] - H(pi) ln2/lam
    rng = np.random.default_rng(seed)
    c = random_costs(rng, 30, wet_frac=0.1)
    m = solve_lambda(c, 0.4 * c.capacity_bits())
    f_pi = expected_distortion(m, c) - total_entropy(m) * LN2 / m.lam
    for _ in range(20):
        q = rng.random((30, 3)) * np.isfinite(c.costs)
        q /= q.sum(axis=1, keepdims=True)
        f_q = expected_distortion(q, c) - total_entropy(q) * LN2 / m.lam
        assert f_q >= f_pi - 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 20.0), st.floats(0.0, 20.0))
def test_entropy_decreases_in_lambda(seed, a, b):
    rng = np.random.default_rng(seed)
    c = random_costs(rng, 20)
    lo, hi = sorted((a, b))
    assert total_entropy(gibbs(c, lo)) >= total_entropy(gibbs(c, hi)) - 1e-12


def test_solver_is_deterministic():
    rng = np.random.default_rng(11)
    c = random_costs(rng, 500, wet_frac=0.05)
    a, b = solve_lambda(c, 200), solve_lambda(c, 200)
    assert a.lam == b.lam
    assert np.array_equal(a.quantized, b.quantized)


def test_quantize_ties_and_floor():
    assert quantize(np.array([[1 / 3, 1 / 3, 1 / 3]]), 2).tolist() == [[2, 1, 1]]
    q = quantize(np.array([[1e-9, 1 - 2e-9, 1e-9]]), 16)
    assert q.tolist() == [[1, 65534, 1]]
    assert quantize(np.array([[0.0, 1.0, 0.0]]), 16).tolist() == [[0, 65536, 0]]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=6).filter(lambda v: sum(v) > 0),
       st.integers(4, 20))
def test_quantize_properties(v, gamma):
    p = np.array([v]) / sum(v)
    q = quantize(p, gamma)
    assert q.sum() == 1 << gamma
    assert ((q > 0) == (p > 0)).all()
    k = p.shape[1]
    # largest remainder stays within one count of the ideal, plus the floor correction
    assert (np.abs(q - p * (1 << gamma)) <= k + 1).all()


def test_quantization_kl_small_and_nonnegative():
    rng = np.random.default_rng(2)
    c = random_costs(rng, 1000, wet_frac=0.05)
    m = solve_lambda(c, 300)
    kl = quantization_kl(m)
    assert (kl >= -1e-12).all()
    assert kl.max() < 1e-3


def test_selfinfo_moments_against_enumeration():
    m = make_model(ternary_map([1.0, 2.0]), 1.0)
    q = m.quantized_probs()
    vals, probs = [], []
    for a in range(3):
        for b in range(3):
            vals.append(-math.log2(q[0, a]) - math.log2(q[1, b]))
            probs.append(q[0, a] * q[1, b])
    vals, probs = np.array(vals), np.array(probs)
    mean = (vals * probs).sum()
    var = ((vals - mean) ** 2 * probs).sum()
    got = selfinfo_moments(m)
    assert got[0] == pytest.approx(mean, rel=1e-12)
    assert got[1] == pytest.approx(var, rel=1e-9)
    assert got[0] == pytest.approx(row_entropy(q).sum(), rel=1e-12)
