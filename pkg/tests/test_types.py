import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crstego.errors import (
    ConfigError,
    LengthMismatch,
    PatternOutOfRange,
    RangeViolation,
    ShapeMismatch,
)
from crstego.types import (
    TERNARY,
    AudioKind,
    BitMessage,
    CoderConfig,
    CostMap,
    Cover,
    ImageKind,
    ModificationPattern,
    ProbabilityModel,
    apply_pattern,
    diff_pattern,
    distortion,
)


def cov(vals, lo=0, hi=255):
    return Cover(np.array(vals), lo, hi)


def test_apply_identity():
    assert apply_pattern(cov([5, 6, 7]), ModificationPattern([0, 0, 0], TERNARY)) == cov([5, 6, 7])


def test_apply_elementwise():
    y = apply_pattern(cov([5, 6, 7]), ModificationPattern([-1, 0, 1], TERNARY))
    assert y.samples.tolist() == [4, 6, 8]


def test_apply_saturation_is_an_error():
    with pytest.raises(RangeViolation):
        apply_pattern(cov([255]), ModificationPattern([1], TERNARY))


def test_apply_length_mismatch():
    with pytest.raises(LengthMismatch):
        apply_pattern(cov([1, 2]), ModificationPattern([0], TERNARY))


def test_diff_examples():
    x = cov([5, 6, 7])
    assert diff_pattern(x, x).deltas.tolist() == [0, 0, 0]
    assert diff_pattern(cov([4, 6, 8]), x).deltas.tolist() == [-1, 0, 1]
    with pytest.raises(PatternOutOfRange):
        diff_pattern(cov([9, 6, 7]), x)


def test_diff_kind_mismatch():
    a = Cover([1, 2, 3, 4], 0, 255, ImageKind(2, 2))
    b = Cover([1, 2, 3, 4], 0, 255, AudioKind(8000))
    with pytest.raises(LengthMismatch):
        diff_pattern(a, b)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 254), st.sampled_from(TERNARY)), min_size=1, max_size=50))
def test_apply_diff_inverse(pairs):
    x = cov([p[0] for p in pairs])
    e = ModificationPattern([p[1] for p in pairs], TERNARY)
    assert np.array_equal(diff_pattern(apply_pattern(x, e), x).deltas, e.deltas)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0.01, 10), st.sampled_from(TERNARY)), min_size=1, max_size=40))
def test_distortion_additive_and_zero_iff_unchanged(rows):
    pm = np.array([r[0] for r in rows])
    costs = CostMap(np.stack([pm, np.zeros(pm.size), pm], 1), TERNARY)
    e = ModificationPattern([r[1] for r in rows], TERNARY)
    d = distortion(costs, e)
    assert d == pytest.approx(sum(c for c, delta in rows if delta != 0))
    assert (d == 0) == all(r[1] == 0 for r in rows)


def test_cover_validation():
    with pytest.raises(RangeViolation):
        Cover([300], 0, 255)
    with pytest.raises(ShapeMismatch):
        Cover([1, 2, 3], 0, 255, ImageKind(2, 2))
    with pytest.raises(ConfigError):
        Cover([], 0, 255)
    c = Cover([1, 2, 3, 4], 0, 255, ImageKind(2, 2))
    assert c.as_image().shape == (2, 2)
    with pytest.raises(ValueError):
        c.samples[0] = 9


def test_pattern_outside_delta_set():
    with pytest.raises(PatternOutOfRange):
        ModificationPattern([2], TERNARY)


def test_costmap_validation():
    with pytest.raises(ConfigError):
        CostMap(np.array([[1.0, 0.5, 1.0]]), TERNARY)      # zero delta must cost 0
    with pytest.raises(ConfigError):
        CostMap(np.array([[-1.0, 0.0, 1.0]]), TERNARY)
    with pytest.raises(ConfigError):
        CostMap(np.array([[1.0, 0.0, 1.0]]), (1, 0, -1))
    c = CostMap(np.array([[1.0, 0.0, np.inf], [np.inf, 0.0, np.inf]]), TERNARY)
    assert c.wet().tolist() == [[False, False, True], [True, False, True]]
    assert c.capacity_bits() == pytest.approx(1.0)


def test_probability_model_validation():
    p = np.array([[0.25, 0.5, 0.25]])
    ProbabilityModel(p, 0.7, np.array([[16384, 32768, 16384]]), 16, TERNARY)
    with pytest.raises(ConfigError):
        ProbabilityModel(p, 0.7, np.array([[16384, 32768, 16383]]), 16, TERNARY)
    with pytest.raises(ConfigError):   # support mismatch
        ProbabilityModel(p, 0.7, np.array([[0, 49152, 16384]]), 16, TERNARY)
    m = ProbabilityModel(p, 0.7, np.array([[16384, 32768, 16384]]), 16, TERNARY)
    assert m.cumulative().tolist() == [[0, 16384, 49152, 65536]]


def test_bitmessage_bytes_roundtrip():
    m = BitMessage.from_bytes(b"\xb2\x80", 9)
    assert m.bits.tolist() == [1, 0, 1, 1, 0, 0, 1, 0, 1]
    assert m.to_bytes() == b"\xb2\x80"
    with pytest.raises(ConfigError):
        BitMessage.from_bytes(b"\x00", 9)
    with pytest.raises(ConfigError):
        BitMessage([0, 2])


def test_bitmessage_states():
    with pytest.raises(ConfigError):
        BitMessage([0, 1], state="bogus")
    with pytest.raises(ConfigError):
        BitMessage([0, 1, 1], plaintext_len=2, state="encrypted")
    m = BitMessage([0, 1, 1], plaintext_len=2, state="encrypted_padded")
    assert m.head().tolist() == [0, 1]


def test_coder_config_limits():
    CoderConfig(32, 16)
    CoderConfig(64, 16)
    with pytest.raises(ConfigError):
        CoderConfig(18, 16)
    with pytest.raises(ConfigError):
        CoderConfig(72, 16)
