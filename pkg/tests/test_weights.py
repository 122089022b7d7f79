import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from disclab import weights
from disclab.errors import ParameterError
from disclab.maximal import hl_max_1d_all
from disclab.weights import WeightSamples, a1_construct, ap_characteristic, maximal_all

chi01 = lambda x: ((x >= 0) & (x <= 1)).astype(float)


def step_weight(seed, cells=64):
    rng = np.random.default_rng(seed)
    edges = np.sort(rng.uniform(-1, 1, 4))
    vals = rng.uniform(0.1, 5.0, 5)
    return WeightSamples.from_function(lambda x: vals[np.searchsorted(edges, x)], cells)


def test_constant_weight_is_one():
    for p in (1.2, 2, 5):
        assert ap_characteristic(WeightSamples.from_function(np.ones_like, 256), p).value == 1.0


def test_validation():
    with pytest.raises(ParameterError):
        WeightSamples(np.arange(3.0), np.array([1.0, -1.0, 1.0]))
    with pytest.raises(ParameterError):
        WeightSamples(np.arange(3.0), np.zeros(3))
    with pytest.raises(ParameterError):
        ap_characteristic(WeightSamples.from_function(chi01, 64), 2)
    with pytest.raises(ParameterError):
        ap_characteristic(WeightSamples.from_function(np.ones_like, 64), 1)
    with pytest.raises(ParameterError):
        a1_construct(WeightSamples.from_function(np.ones_like, 64), 1)


def brute_ap(v, p):
    best = 0.0
    for i in range(v.size):
        for j in range(i + 1, v.size + 1):
            best = max(best, v[i:j].mean() * (v[i:j] ** (-1 / (p - 1))).mean() ** (p - 1))
    return best


@given(st.integers(0, 2 ** 31), st.floats(1.1, 6))
def test_ap_matches_brute_force(seed, p):
    w = step_weight(seed, 24)
    assert ap_characteristic(w, p).value == pytest.approx(max(brute_ap(w.values, p), 1.0), rel=1e-12)


@given(st.integers(0, 2 ** 31), st.floats(1.1, 6))
def test_ap_at_least_one(seed, p):
    assert ap_characteristic(step_weight(seed), p).value >= 1.0


@given(st.integers(0, 2 ** 31), st.floats(1.1, 6))
def test_ap_duality(seed, p):
    w = step_weight(seed)
    pp = p / (p - 1)
    dual = WeightSamples(w.x, w.values ** (1 - pp))
    a = ap_characteristic(w, p).value ** (1 / p)
    b = ap_characteristic(dual, pp).value ** (1 / pp)
    assert a == pytest.approx(b, rel=1e-9)


def test_sqrt_weight_stable():
    t = weights.power_characteristics(0.5, 2.0, (1024, 2048, 4096))
    assert max(abs(b - a) / a for a, b in zip(t, t[1:])) < 0.05


def test_linear_weight_growth():
    # boundary exponent alpha = p - 1; measured growth is about 1.2 per 4x refinement
    t = weights.power_characteristics(1.0, 2.0, (1024, 4096))
    assert t[1] / t[0] >= 2


def test_outside_range_characteristic_increases():
    for a in (-1.1, 1.0, 1.5):
        t = weights.power_characteristics(a, 2.0, (256, 1024, 4096))
        assert t[0] < t[1] < t[2]


def test_power_classification_inside_range():
    rows, sandwich = weights.power_weight_range_scan(2.0, [-0.5, 0.0, 0.5], levels=(256, 1024, 4096))
    assert {r.classification for r in rows} == {"stable"}
    assert sandwich == {-0.5: True, 0.0: True}
    assert weights.power_rows_csv(rows).splitlines()[0] == "alpha,p,level,nodes,characteristic,classification"


def test_power_classification_outside_range():
    rows, _ = weights.power_weight_range_scan(2.0, [-1.1, 1.0, 1.5], levels=(256, 1024, 4096))
    assert {r.classification for r in rows} == {"divergent"}


def test_maximal_all_matches_brute():
    v = np.random.default_rng(1).uniform(0, 1, 80)
    assert np.allclose(maximal_all(v), hl_max_1d_all(v), rtol=0, atol=1e-14)


def test_a1_construct_constant():
    out = a1_construct(WeightSamples.from_function(np.ones_like, 128), 2)
    assert np.allclose(out.values, 1.0, rtol=0, atol=1e-15)


def test_a1_construct_indicator_value():
    w = WeightSamples.from_function(chi01, 2048, X=4.0)
    out = a1_construct(w, 2)
    i = int(np.argmin(np.abs(w.x - 2)))
    assert out.values[i] == pytest.approx(math.sqrt(0.5), abs=2e-3)


@given(st.integers(0, 2 ** 31), st.floats(1.1, 4), st.floats(0.1, 10))
def test_a1_construct_properties(seed, s, c):
    w = step_weight(seed)
    out = a1_construct(w, s).values
    assert np.all(out >= w.values * (1 - 1e-12))
    scaled = a1_construct(WeightSamples(w.x, c * w.values), s).values
    assert np.allclose(scaled, c * out, rtol=1e-12)
    bigger = a1_construct(WeightSamples(w.x, w.values + 0.5), s).values
    assert np.all(bigger >= out * (1 - 1e-12))


def test_a1_lemma_constant():
    assert weights.a1_lemma_check(np.ones_like, 2, (128, 256)).trace == [1.0, 1.0]


def test_a1_lemma_indicator_stable():
    t = weights.a1_lemma_check(chi01, 2, (512, 1024, 2048), X=4.0).trace
    assert max(abs(b - a) / a for a, b in zip(t, t[1:])) < 0.1


def test_sandwich_spec_point():
    lo, val, up = weights.sandwich_check(-0.5, 1.5, [0.25])
    assert lo[0] <= val[0] <= up[0]


@given(st.floats(-0.6, 0.0), st.floats(1.1, 1.6), st.floats(1 / 16, 0.9))
def test_sandwich_property(alpha, s, x):
    # below s*alpha = -0.75 midpoint sampling of the singularity beats the slack in the lower bound
    assume(s * alpha >= -0.75)
    lo, val, up = weights.sandwich_check(alpha, s, [x], cells=2048)
    assert lo[0] <= val[0] * (1 + 1e-12) and val[0] <= up[0] * (1 + 1e-12)


def test_sandwich_rejects_range():
    with pytest.raises(ParameterError):
        weights.sandwich_check(-0.9, 1.5, [0.25])
