import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from disclab import tubes
from disclab.errors import FitError, GeometryError, ParameterError
from disclab.tubes import ShellSpec, TubeSet, fit_overlap_exponent, generate_brush, overlap_histogram


def test_planar_packing_count():
    brush = generate_brush(ShellSpec(2, 1, 1, 0.5, 1 / 64))
    target = 4 * math.pi * 64
    assert target / 2 <= len(brush) <= 2 * target


def test_infeasible_tangency():
    with pytest.raises(GeometryError):
        ShellSpec(2, 1, 1, 2, 1 / 64)


def test_spec_validation():
    with pytest.raises(ParameterError):
        ShellSpec(4, 1, 1, 1, 1 / 64)
    with pytest.raises(ParameterError):
        ShellSpec(2, 1, 1, 1, 1 / 8)


def test_kind():
    assert ShellSpec(2, 8, 1, 8, 1 / 64).kind == "thin"
    assert ShellSpec(2, 1, 1, 1, 1 / 64).kind == "thick"


def test_thin_tubes_cross_shell():
    brush = generate_brush(ShellSpec(2, 8, 1, 8, 1 / 64))
    assert brush.lengths().min() >= 1.0


@given(st.sampled_from([2, 3]), st.floats(0.5, 2), st.floats(0.5, 2), st.floats(0.2, 1.0))
def test_tube_invariants(n, R, D, frac):
    spec = ShellSpec(n, R, D, frac * R, D / 16)
    res = generate_brush(spec).residuals()
    assert max(res.values()) < 1e-9


def single(a, b, eps=1 / 16):
    spec = ShellSpec(2, 1, 1, 1, eps)
    return TubeSet(np.array([a], float), np.array([b], float), eps, spec)


def test_single_tube_volume():
    t = single([0.0, 2.0], [0.0, 1.0])
    hist = overlap_histogram(t)
    assert len(hist.measure) == 1
    assert hist.measure[0] == pytest.approx(hist.total_tube_volume, rel=0.1)


def test_two_disjoint_tubes():
    spec = ShellSpec(2, 1, 1, 1, 1 / 16)
    t = TubeSet(np.array([[0.0, 2.0], [0.0, -2.0]]), np.array([[0.0, 1.0], [0.0, -1.0]]), 1 / 16, spec)
    hist = overlap_histogram(t)
    assert hist.d.max() == 1


def test_histogram_identities():
    brush = generate_brush(ShellSpec(2, 1, 1, 1, 1 / 64))
    hist = overlap_histogram(brush)
    assert np.all(np.diff(hist.measure) <= 0)
    # sum over levels of |{count >= d}| is the integral of the count
    assert hist.measure.sum() == pytest.approx(hist.raster_volume, rel=1e-12)
    assert hist.raster_volume == pytest.approx(hist.total_tube_volume, rel=0.1)
    assert hist.to_csv().startswith("d,measure\n")


def test_fit_needs_levels():
    with pytest.raises(FitError):
        fit_overlap_exponent(overlap_histogram(single([0.0, 2.0], [0.0, 1.0])))


def test_planar_exponent_and_raster_stability():
    spec = ShellSpec(2, 1, 1, 1, 1 / 128)
    brush = generate_brush(spec)
    a = fit_overlap_exponent(overlap_histogram(brush)).slope
    b = fit_overlap_exponent(overlap_histogram(brush, h=spec.eps / 8)).slope
    assert a == pytest.approx(-2, abs=0.3)
    assert abs(a - b) < 0.1


def test_raster_resolution_guard():
    brush = generate_brush(ShellSpec(2, 1, 1, 1, 1 / 64))
    with pytest.raises(ParameterError):
        tubes.rasterize(brush, h=1 / 64)


def test_per_sphere_constants_positive():
    spec = ShellSpec(2, 1, 1, 1, 1 / 64)
    brush = generate_brush(spec)
    ras = tubes.rasterize(brush)
    c = tubes.per_sphere_constants(brush, ras, np.linspace(1, 2, 7)[1:-1])
    assert np.all(c > 0)
    assert c.max() / c.min() <= 2


def test_thin_shell():
    res = tubes.thin_shell_2d(ShellSpec(2, 8, 1, 8, 1 / 64))
    assert res.hist.measure[0] <= res.hist.total_tube_volume * 1.1
    assert math.isfinite(res.ratio) and res.ratio > 0
    with pytest.raises(ParameterError):
        tubes.thin_shell_2d(ShellSpec(2, 1, 1, 1, 1 / 64))


def test_tube_json_roundtrip():
    import json
    t = single([0.0, 2.0], [0.0, 1.0])
    data = json.loads(t.to_json())
    assert data["eps"] == 1 / 16 and data["tubes"] == [[[0.0, 2.0], [0.0, 1.0]]]
