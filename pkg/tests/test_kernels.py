import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from disclab import kernels
from disclab.errors import ParameterError, SingularityError
from disclab.grids import RadialProfile, make_grid
from disclab.kernels import (KernelSpec, RegionPartition, apply_tkn, kernel_k, kernel_matrix, kernel_split,
                             kj_uniformity_scan, lp_operator_norm, tkn_matrix, uniformity_csv,
                             weighted_mixed_test)

# K_nu(t, r) frozen from mpmath quadrature of the defining s-integral (30 digits)
K_TABLE = [
    (3, 5, 7, 0.18013321139462536462),
    (4, 10, 10, 0.30944853238992896519),
    (1, 2, 1, 0.11514618827361436953),
    (10, 30, 31, 0.25735154953351586202),
    (0, 0.5, 40, 0.013224030843824502821),
    (2.5, 12, 12.00001, 0.31984860340163245039),
]


def half_order_kernel(t, r):
    t, r = np.asarray(t, float), np.asarray(r, float)
    return (np.sinc((t - r) / np.pi) - np.sin(t + r) / (t + r)) / np.pi


@pytest.mark.parametrize("nu,t,r,expected", K_TABLE)
def test_kernel_frozen_values(nu, t, r, expected):
    assert kernel_k(nu, t, r) == pytest.approx(expected, abs=1e-10)


def test_kernel_half_order_diagonal():
    assert kernel_k(0.5, math.pi, math.pi) == pytest.approx(1 / math.pi, abs=1e-8)


def test_kernel_half_order_random(rng):
    t = rng.uniform(0.1, 50, 100)
    r = rng.uniform(0.1, 50, 100)
    r[:20] = t[:20] + rng.uniform(-1e-4, 1e-4, 20)
    assert np.max(np.abs(kernel_k(0.5, t, r) - half_order_kernel(t, r))) <= 1e-8


@pytest.mark.parametrize("nu", [1, 2.5, 10])
def test_kernel_symmetric_examples(nu):
    assert kernel_k(nu, 1, 2) == pytest.approx(kernel_k(nu, 2, 1), abs=1e-14)


def test_closed_form_matches_direct_quadrature():
    direct = float(kernels._s_integral(3, 5.0, 7.0)[0])
    assert kernel_k(3, 5, 7) == pytest.approx(direct, abs=1e-8)


@given(st.floats(0, 40), st.floats(0.1, 60), st.floats(0.1, 60))
def test_kernel_symmetry_property(nu, t, r):
    assert kernel_k(nu, t, r) == pytest.approx(kernel_k(nu, r, t), abs=1e-11)


def test_kernel_rejects_nonpositive():
    with pytest.raises(ParameterError):
        kernel_k(1, 0.0, 1.0)
    with pytest.raises(ParameterError):
        kernel_k(1, 1.0, -2.0)


@pytest.mark.parametrize("nu", [0.5, 3, 20])
def test_diagonal_continuity(nu):
    t = 1.3 * nu + 2
    d = [abs(kernel_k(nu, t, t * (1 + e)) - kernel_k(nu, t, t)) for e in (1e-2, 1e-4, 1e-6)]
    assert d[0] > d[1] > d[2]
    assert d[2] < 1e-6


def test_split_sums_to_kernel():
    parts = [kernel_split(KernelSpec(2, j), 3.0, 5.0) for j in ("j1", "j2", "j3", "j4")]
    assert sum(parts) == pytest.approx(kernel_k(2, 3.0, 5.0), abs=1e-10)


@given(st.floats(0.5, 30), st.floats(0.1, 80), st.floats(0.1, 80))
def test_split_sum_property(nu, t, r):
    if abs(t - r) < 1e-2:
        r = t + 0.5
    parts = sum(kernel_split(KernelSpec(nu, j), t, r) for j in ("j1", "j2", "j3", "j4"))
    assert parts == pytest.approx(kernel_k(nu, t, r), abs=1e-10)


def test_split_region_indicator():
    assert kernel_split(KernelSpec(4, "j2", ("zero", "critical")), 10.0, 5.0) == 0.0


def test_split_singular_on_diagonal():
    with pytest.raises(SingularityError):
        kernel_split(KernelSpec(1, "j1"), 2.0, 2.0)
    with pytest.raises(SingularityError):
        kernel_split(KernelSpec(1, "j3"), 2.0, 2.0)


def test_j2_half_order_diagonal():
    # j2 at t = r reduces to -J'(t)J(t)/4; J_{1/2}(pi) = 0
    val = kernel_split(KernelSpec(0.5, "j2"), math.pi, math.pi)
    jp = -math.sqrt(2 / math.pi ** 3)
    assert math.isfinite(val)
    assert val == pytest.approx(-math.pi * jp * 0.0 / (4 * math.pi), abs=1e-15)


def test_spec_validation():
    with pytest.raises(ParameterError):
        KernelSpec(-1)
    with pytest.raises(ParameterError):
        KernelSpec(1, "j5")
    with pytest.raises(ParameterError):
        KernelSpec(1, "j1", ("zero", "middle"))


def test_region_partition():
    part = RegionPartition(64)
    assert part.zero == (0.0, 32)
    assert part.critical == (32, 128)
    assert part.kmax == 4
    bands = part.bands()
    assert bands[0][0] == "core"
    up, down = part.g_bands()
    assert len(up) == len(down) == 9


# -------------------------------------------------------------- operators
def test_lp_norm_identity():
    for p in (1.5, 2, 3, 7):
        assert lp_operator_norm(np.eye(5), p).value == pytest.approx(1, abs=1e-9)


def test_lp_norm_swap():
    assert lp_operator_norm(np.array([[0.0, 1.0], [1.0, 0.0]]), 2).value == pytest.approx(1, abs=1e-9)


def test_lp_norm_diagonal():
    assert lp_operator_norm(np.diag([3.0, 1.0]), 3).value == pytest.approx(3, abs=1e-6)


def test_lp_norm_zero_and_bad_p():
    assert lp_operator_norm(np.zeros((3, 3)), 2).value == 0.0
    with pytest.raises(ParameterError):
        lp_operator_norm(np.eye(2), 1.0)


@given(st.integers(2, 8), st.integers(0, 2 ** 31))
def test_lp_norm_bounds(m, seed):
    A = np.random.default_rng(seed).normal(size=(m, m))
    est = lp_operator_norm(A, 2)
    assert est.value <= np.linalg.norm(A) * (1 + 1e-12)
    assert est.value >= np.max(np.linalg.norm(A, axis=0)) * (1 - 1e-12)
    assert np.all(np.diff(est.history) >= 0)


def test_lp_norm_two_matches_svd(rng):
    A = rng.normal(size=(12, 9))
    assert lp_operator_norm(A, 2, tol=1e-12).value == pytest.approx(np.linalg.norm(A, 2), rel=1e-6)


def test_apply_tkn_zero():
    g = make_grid("linear", 8, 65)
    out = apply_tkn(2, 1, RadialProfile(g, np.zeros(g.size)))
    assert not np.any(out.values)


def test_tkn_rejects_bad_degree():
    g = make_grid("linear", 8, 65)
    with pytest.raises(ParameterError):
        tkn_matrix(2, -1, g, g)


@pytest.mark.parametrize("k", [0, 2])
def test_projection_improves_with_extent(k):
    errs = []
    for rmax, cnt in ((64, 513), (128, 1025)):
        g = make_grid("linear", rmax, cnt)
        f = RadialProfile.from_function(g, lambda x: x ** k * np.exp(-x * x / 2))
        T = apply_tkn(2, k, f)
        TT = apply_tkn(2, k, T)
        sel = g.nodes <= 4
        w = (g.weights * g.nodes)[sel]
        errs.append(np.sqrt(np.sum(np.abs(TT.values - T.values)[sel] ** 2 * w) /
                            np.sum(np.abs(T.values)[sel] ** 2 * w)))
    assert errs[0] <= 0.05
    assert errs[1] <= 0.6 * errs[0]


def test_kernel_matrix_zero_row():
    K = kernel_matrix(1.0, np.array([0.0, 1.0]), np.array([0.5, 2.0]))
    assert np.all(K[0] == 0)
    assert K[1, 1] == pytest.approx(kernel_k(1.0, 1.0, 2.0), abs=1e-14)


def test_uniformity_single_order():
    rows = kj_uniformity_scan(2, [16])
    assert len(rows) == 3
    assert all(math.isfinite(r.estimate.value) and r.estimate.value > 0 for r in rows)
    assert uniformity_csv(rows).splitlines()[0] == "nu,p,block,alpha,norm_estimate,iterations,converged"


def test_weighted_mixed():
    g = make_grid("linear", 40, 801)
    bump = RadialProfile.from_function(g, lambda r: ((r >= 5) & (r <= 20)).astype(float))
    res = weighted_mixed_test(2, 2, [10], [bump])
    assert res.ratio is not None and 0 < res.ratio < 2
    empty = weighted_mixed_test(2, 2, [10], [RadialProfile(g, np.zeros(g.size))])
    assert empty.empty and empty.ratio is None
    with pytest.raises(ParameterError):
        weighted_mixed_test(4.5, 2, [10], [bump])
