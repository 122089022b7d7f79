import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from disclab import bessel
from disclab.bessel import (RegimeTag, bessel_j, bessel_j_prime, bessel_sequence, classify_regime, jv, jvp,
                            log_bessel_decay, prodj_integral, vdc_bound, vdc_scan)
from disclab.errors import ParameterError

# J_nu(x) frozen from mpmath at 30 digits
J_TABLE = [
    (0, 1, 0.76519768655796655145),
    (0.5, 3, 0.065008182877375778114),
    (2.5, 17.3, 0.18915800682153417721),
    (3, 25, 0.10834308106150889528),
    (10, 30.5, -0.14841987879599051645),
    (50, 40, 0.00068185243531768311415),
    (50, 80, -0.03945776459025124936),
    (100, 150, -0.015359526118405390629),
    (200, 199, 0.0646389635767720465),
    (300, 150, 4.386129482356853121e-61),
    (512, 1000, -0.020658924642019621),
    (0.3, 2500, -0.0061203920710890207223),
    (7.25, 4999.9, 0.0049408264514930006344),
    (1, 0.001, 0.00049999993750000261457),
]

JP_TABLE = [
    (0, 5, 0.32757913759146522204),
    (1.5, 22, -0.013098950662335988535),
    (40, 60, 0.068687649820770650819),
    (100, 101, 0.017617062040140586254),
    (7, 3000, 0.0078941320492885712966),
]

LOGJ_TABLE = [
    (130, 64, -63.655826866970303292),
    (600, 100.3, -897.46363753250874327),
    (230.5, 100.3, -135.84060699933206719),
    (1025, 256, -1127.9089213675001207),
]


@pytest.mark.parametrize("nu,x,ref", J_TABLE)
def test_jv_frozen_oracle(nu, x, ref):
    v, e = jv(nu, x, return_error=True)
    assert abs(v - ref) <= 1e-12 + 1e-12 * abs(ref)
    assert abs(v - ref) <= e + 1e-15


@pytest.mark.parametrize("nu,x,ref", JP_TABLE)
def test_jvp_frozen_oracle(nu, x, ref):
    assert jvp(nu, x) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("nu,k_lo,x,ref", [(0.0, 130, 64.0, LOGJ_TABLE[0][2]), (0.0, 130, 100.3, LOGJ_TABLE[1][2]),
                                           (0.5, 130, 100.3, LOGJ_TABLE[2][2]), (0.0, 1025, 256.0, LOGJ_TABLE[3][2])])
def test_log_bessel_decay_frozen(nu, k_lo, x, ref):
    target = {-63.655826866970303292: 130, -897.46363753250874327: 600, -135.84060699933206719: 230,
              -1127.9089213675001207: 1025}[ref]
    out = log_bessel_decay(nu, k_lo, target + 5, np.array([x]))
    assert out[target - k_lo, 0] == pytest.approx(ref, rel=1e-13)


def test_log_bessel_decay_domain():
    with pytest.raises(ParameterError):
        log_bessel_decay(0.0, 10, 20, np.array([50.0]))


def test_spec_examples():
    assert bessel_j(0, 0).value == 1.0
    assert bessel_j(0.5, math.pi / 2).value == pytest.approx(2 / math.pi, abs=1e-10)
    assert abs(bessel_j(0, 2.404825557695773).value) <= 1e-9
    assert bessel_j_prime(0, 0).value == 0
    assert bessel_j_prime(1, 0).value == pytest.approx(0.5, abs=1e-15)
    assert bessel_j_prime(0.5, math.pi / 2).value == pytest.approx(-2 / math.pi ** 2, abs=1e-9)


def test_invalid_inputs():
    for args in [(-1.5, 1.0), (1.0, -1.0), (math.nan, 1.0), (1.0, math.inf)]:
        with pytest.raises(ParameterError):
            bessel_j(*args)


def test_series_against_integral(rng):
    nu = rng.uniform(0, 40, 50)
    x = rng.uniform(0.1, 20, 50)
    vs, es = jv(nu, x, return_error=True)
    vi, ei = bessel._integral(nu, x)
    assert np.all(np.abs(vs - vi) <= es + ei + 1e-15)


@pytest.mark.parametrize("nu", [0.5, 1.5, 2.5])
def test_half_integer_identity(nu, rng):
    x = rng.uniform(0.1, 50, 20)
    pre = np.sqrt(2 / (np.pi * x))
    closed = {0.5: pre * np.sin(x), 1.5: pre * (np.sin(x) / x - np.cos(x)),
              2.5: pre * ((3 / x ** 2 - 1) * np.sin(x) - 3 * np.cos(x) / x)}[nu]
    assert np.max(np.abs(jv(nu, x) - closed)) <= 1e-10


@given(st.floats(1, 300), st.floats(1, 3000))
def test_recurrence(nu, x):
    lhs = jv(nu + 1, x) + jv(nu - 1, x)
    rhs = 2 * nu / x * jv(nu, x)
    scale = max(abs(jv(nu + 1, x)), abs(jv(nu - 1, x)), abs(rhs), 1e-300)
    assert abs(lhs - rhs) <= 1e-8 * scale + 1e-14


@given(st.floats(0, 80), st.floats(0.01, 120))
def test_against_live_mpmath(nu, x):
    ref = float(mp.besselj(nu, x))
    v, e = jv(nu, x, return_error=True)
    assert abs(v - ref) <= max(e, 1e-15) + 1e-15


def test_sequence_matches_direct():
    x = np.array([3.0, 40.0, 250.0])
    S = bessel_sequence(0.5, 400, x)
    for k in (0, 7, 39, 120, 260):
        ref = np.array([float(mp.besselj(0.5 + k, v)) for v in x])
        assert np.all(np.abs(S[k] - ref) <= 1e-12 * np.maximum(np.abs(ref), 1e-290) + 1e-300)


@pytest.mark.parametrize("nu,x,tag", [(100, 200, "oscillatory"), (100, 100 + 2 * 100 ** (1 / 3), "transition_above"),
                                      (100, 10, "transition_below"), (100, 95, "transition_below"),
                                      (100, 99, "subcritical"), (100, 100.5, "subcritical"), (10, 15, "oscillatory")])
def test_classify(nu, x, tag):
    assert classify_regime(nu, x).tag == tag


def test_transition_rho():
    assert classify_regime(100, 100 + 2 * 100 ** (1 / 3)).rho == pytest.approx(2)


def test_vdc_bound_examples():
    assert vdc_bound(RegimeTag("oscillatory"), 100, 400) == (0.05, 0.05)
    b = vdc_bound(RegimeTag("transition_above", 16.0), 1000, 1000 + 16 * 10)
    assert b[0] == pytest.approx(0.05)
    assert vdc_bound(RegimeTag("subcritical"), 99, 10) == pytest.approx((0.01, 1e-4))


def test_vdc_scan_small_order_finite():
    rep = vdc_scan([1], 64)
    assert all(math.isfinite(v) for v in rep.max_ratio.values())
    assert rep.to_csv().startswith("nu,x_or_p,regime,value,bound,ratio")


def test_vdc_scan_rejects_low_order():
    with pytest.raises(ParameterError):
        vdc_scan([0.5], 16)


def test_prodj_examples():
    a, b = prodj_integral(64, 2), prodj_integral(256, 2)
    assert max(a, b) / min(a, b) <= 1.5
    assert prodj_integral(128, 4) > prodj_integral(64, 4)
    assert prodj_integral(2, 2) > 0
    with pytest.raises(ParameterError):
        prodj_integral(1, 2)
