import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from disclab import restriction as rs
from disclab.bessel import jv
from disclab.errors import FitError, ParameterError
from disclab.restriction import HarmonicCoefficients, extension_magnitude, extension_mixed_norm

J0_ZERO = 2.404825557695773

# G(r) for n = 2 frozen from mpmath: a = {0: 1} and a = {0: 1, 3: 2}
G_TABLE = [
    (0.1, 5.67819399470782857201541528847, 5.67854740401354865119966668011),
    (0.7, 2.15271539469904522247833334236, 5.81892985022138536309770363418),
    (3.3, 0.505651488601518678366401847239, 2.19773542257996586796935482246),
]

# int_16^32 4 pi^2 r J_{7/2}(2 pi r)^2 dr, mpmath at 30 digits
RING_N3_K3 = 32.0000246718170946164366499567


@pytest.fixture(scope="module")
def scan():
    return rs.dyadic_block_scan(6.0, (32, 64, 128, 256))


@pytest.mark.parametrize("r,g0,g03", G_TABLE)
def test_extension_frozen(r, g0, g03):
    assert extension_magnitude(HarmonicCoefficients({0: 1.0}), r) == pytest.approx(g0, rel=1e-10)
    assert extension_magnitude(HarmonicCoefficients({0: 1.0, 3: 2.0}), r) == pytest.approx(g03, rel=1e-10)


def test_extension_zero_of_j0():
    assert extension_magnitude(HarmonicCoefficients({0: 1.0}), J0_ZERO / (2 * math.pi)) <= 1e-8


def test_extension_zero_coefficients():
    r = np.linspace(0.1, 10, 50)
    assert not np.any(rs.extension_profile(HarmonicCoefficients({}), r).values)


@given(st.floats(1e-6, 1e6), st.floats(0, 2 * math.pi), st.floats(0.05, 40))
def test_extension_homogeneous(mag, phase, r):
    a = HarmonicCoefficients({0: 1.0, 2: 0.5j, 5: -1.0})
    c = mag * complex(math.cos(phase), math.sin(phase))
    b = HarmonicCoefficients({k: c * v for k, v in a.a.items()})
    assert extension_magnitude(b, r) == pytest.approx(mag * extension_magnitude(a, r), rel=1e-12)


def test_coefficient_validation():
    with pytest.raises(ParameterError):
        HarmonicCoefficients({-1: 1.0})
    with pytest.raises(ParameterError):
        HarmonicCoefficients({0: 1.0}, n=1)
    with pytest.raises(ParameterError):
        extension_magnitude(HarmonicCoefficients({0: 1.0}), 0.0)


def test_parseval_ring():
    a = HarmonicCoefficients.single(3, n=3)
    val = extension_mixed_norm(a, 2.0, r_max=32, r_min=16).value
    assert val ** 2 == pytest.approx(RING_N3_K3, rel=1e-6)


def test_q5_finite_and_stable():
    a = HarmonicCoefficients({0: 1.0})
    x = extension_mixed_norm(a, 5.0, 128)
    y = extension_mixed_norm(a, 5.0, 256)
    assert not x.diverges and not y.diverges
    assert abs(y.value / x.value - 1) < 0.05


def test_q4_flagged():
    res = extension_mixed_norm(HarmonicCoefficients({0: 1.0}), 4.0, 256)
    assert res.diverges
    assert res.tail_slope == pytest.approx(-1, abs=0.05)


def test_q8_five_modes():
    res = extension_mixed_norm(HarmonicCoefficients({k: 1.0 for k in range(5)}), 8.0, 128)
    assert math.isfinite(res.value) and not res.diverges


def test_norm_validation():
    a = HarmonicCoefficients({0: 1.0})
    with pytest.raises(ParameterError):
        extension_mixed_norm(a, 1.5, 10)
    with pytest.raises(ParameterError):
        extension_mixed_norm(a, 5, 10, r_min=20)


@given(st.integers(1, 300), st.integers(0, 3000))
def test_block_ranges_partition(M, k_max):
    covered = []
    for lo, hi in rs.block_ranges(M, k_max).values():
        covered.extend(range(lo, hi + 1))
    assert sorted(covered) == list(range(k_max + 1))


def test_blocks_sum_to_total():
    M, q = 8, 6.0
    a = HarmonicCoefficients.flat(40)
    bv = rs.block_values(a, q, M)
    r, w = rs._gauss_nodes(M, 2 * M, 8.0)
    S = sum(jv(k, r) ** 2 for k in range(41))
    direct = float(np.sum(w * S ** (q / 2) * r))
    assert bv.value("total") == pytest.approx(direct, rel=1e-10)


def test_fit_log_slope():
    Ms = [8, 16, 32, 64]
    est = rs.fit_log_slope(Ms, [-1.5 * math.log(m) + 0.3 for m in Ms])
    assert est.slope == pytest.approx(-1.5, abs=1e-12)
    assert est.interval[0] <= est.slope <= est.interval[1]
    with pytest.raises(FitError):
        rs.fit_log_slope([8, 16], [0.0, 1.0])


def test_scan_validation():
    with pytest.raises(FitError):
        rs.dyadic_block_scan(6.0, (32, 64))
    with pytest.raises(ParameterError):
        rs.dyadic_block_scan(4.0, (8, 16, 32))


def test_scan_first_block(scan):
    assert scan.slopes["I1"].slope == pytest.approx(-1, abs=0.15)


def test_scan_third_block(scan):
    assert scan.slopes["I3"].slope == pytest.approx(-4, abs=0.3)


def test_scan_middle_block(scan):
    assert scan.slopes["I2"].slope == pytest.approx(-2 / 3, abs=0.2)


def test_single_mode_transition_envelope(scan):
    # one mode J_M on [M, 2M] carries the M^((4-q)/3) transition scaling
    assert scan.single_mode.slope == pytest.approx(-2 / 3, abs=0.2)


def test_scan_outputs(scan):
    lines = scan.to_csv().splitlines()
    assert lines[0] == "n,q,M,block,value"
    assert len(lines) == 1 + 4 * 4
    summary = scan.summary()
    assert summary["predicted"] == {"I1": -1.0, "I2": -2 / 3, "I3": -4.0}


def test_slopes_stable_under_quadrature_doubling(scan):
    fine = rs.dyadic_block_scan(6.0, (32, 64, 128, 256), nodes_per_unit=16.0, single_mode=False)
    for name in rs.BLOCKS:
        assert abs(fine.slopes[name].slope - scan.slopes[name].slope) < 0.05


def test_general_dimension_matches_planar_totals(scan):
    a = HarmonicCoefficients.flat(scan.k_max)
    res = rs.general_dimension_block(2, 6.0, scan.Ms, a)
    assert np.allclose(res.log_totals, [v.log_total for v in scan.values], rtol=0, atol=1e-12)


def test_general_dimension_three():
    res = rs.general_dimension_block(3, 4.0, (16, 32, 64, 128))
    assert res.fit.slope < 0
    assert res.predicted == pytest.approx(-1.0)
    low = rs.general_dimension_block(3, 2.9, (16, 32, 64, 128))
    assert low.fit.slope >= 0


def test_transition_bins_cover_masses():
    M = 64
    a = HarmonicCoefficients.flat(4 * M)
    rows = rs.transition_bins(M, a)
    assert rows[0][1] == M // 2
    assert sum(r[3] for r in rows) == pytest.approx(a.mass(rows[0][1], rows[-1][2]))
    spans = [(r[1], r[2]) for r in rows if r[2] >= r[1]]
    assert all(b[0] == a_[1] + 1 for a_, b in zip(spans, spans[1:]))
