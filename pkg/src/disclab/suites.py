"""Named experiment suites and their report records.

Each suite reads a flat configuration (dotted keys with explicit
defaults), writes CSV/JSON data files and PNG figures into the output
directory, and returns a list of checks.  Check ids starting with ``c``
and a two-digit number correspond one-to-one to the acceptance criteria;
ids starting with ``info.`` are informational.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bessel, kernels, maximal, planar, restriction, tubes, weights
from .errors import ParameterError
from .grids import RadialProfile, make_grid

PASS, FAIL, INFO = "pass", "fail", "info"


@dataclass
class Check:
    id: str
    observed: Any
    expected: Any
    tolerance: Any
    status: str

    def to_dict(self) -> dict:
        return _jsonable(asdict(self))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else repr(v)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def _write(out: Path, name: str, text: str) -> None:
    (out / name).write_text(text)


def _doubling(lo: int, hi: int) -> list:
    out, v = [], lo
    while v <= hi:
        out.append(v)
        v *= 2
    return out


# ------------------------------------------------------------------ defaults
DEFAULTS: dict[str, dict] = {
    "bessel-check": {
        "bessel.nu_list": _doubling(8, 512),
        "bessel.samples": 512,
        "bessel.prodj_nu": _doubling(32, 512),
        "bessel.oracle_points": 200,
    },
    "kernel-norms": {
        "kernels.oracle_points": 100,
        "kernels.projection_modes": [0, 1, 4],
        "kernels.projection_grids": [[64.0, 513], [128.0, 1025]],
        "kernels.projection_window": 4.0,
        "kernels.uniformity_nu": _doubling(16, 512),
        "kernels.uniformity_p": 2.0,
    },
    "disc-apply": {
        "disc.modes": [0, 1, 4],
        "disc.N": [512, 1024],
        "disc.L": 16.0,
    },
    "planar-lab": {
        "planar.N": 2048,
        "planar.L": 64.0,
        "planar.r_range": [4.0, 12.0],
        "planar.pad": 16,
        "planar.lab_N": 128,
        "planar.lab_L": 16.0,
        "planar.meyer_dirs": 8,
        "planar.trials": 4,
    },
    "kakeya": {
        "kakeya.deltas": [1 / 4, 1 / 16, 1 / 64],
        "kakeya.p_bounded": 3.0,
        "kakeya.p_forbidden": 1.8,
        "kakeya.n_u": 64,
        "kakeya.n_c": 256,
        "kakeya.grid_count": 2049,
    },
    "tubes": {
        "tubes.thick_2d": [1.0, 1.0, 1.0, 1 / 128],
        "tubes.thick_3d": [1.0, 1.0, 1.0, 1 / 16],
        "tubes.thin_2d": [8.0, 1.0, 8.0],
        "tubes.thin_eps": [1 / 64, 1 / 128],
    },
    "weights": {
        "weights.levels": [1024, 2048, 4096],
        "weights.coarse_fine": [1024, 4096],
        "weights.a1_levels": [1024, 2048, 4096],
        "weights.step_trials": 10,
        "weights.alphas": [-1.1, -0.5, 0.0, 0.5, 1.0, 1.5],
        "weights.sandwich_x": [1 / 16, 1 / 8, 1 / 4, 1 / 2],
    },
    "restriction": {
        "restriction.q": 6.0,
        "restriction.M": [32, 64, 128, 256],
        "restriction.ext_rmax": 256.0,
        "restriction.n3_M": [32, 64, 128, 256],
    },
}

SUITES = list(DEFAULTS)
ALL = "all"


def default_config(suite: str) -> dict:
    if suite == ALL:
        cfg = {}
        for s in SUITES:
            cfg.update(DEFAULTS[s])
        return cfg
    if suite not in DEFAULTS:
        raise ParameterError(f"unknown suite {suite!r}")
    return dict(DEFAULTS[suite])


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(_jsonable(cfg), sort_keys=True).encode()).hexdigest()


# --------------------------------------------------------------- bessel-check
def _half_integer_closed(nu, x):
    s, c = np.sin(x), np.cos(x)
    pre = np.sqrt(2 / (np.pi * x))
    if nu == 0.5:
        return pre * s
    if nu == 1.5:
        return pre * (s / x - c)
    return pre * ((3 / x ** 2 - 1) * s - 3 * c / x)


def suite_bessel(cfg, rng, out, fig):
    checks = []
    m = int(cfg["bessel.oracle_points"])
    nu = rng.uniform(0, 50, m)
    x = rng.uniform(0.05, 20, m)
    series = bessel.jv(nu, x)
    quad = bessel._integral(nu, x)[0]
    err_series = float(np.max(np.abs(series - quad)))
    xs = np.linspace(0.1, 60, m)
    err_half = max(float(np.max(np.abs(bessel.jv(v, xs) - _half_integer_closed(v, xs)))) for v in (0.5, 1.5, 2.5))
    zero = abs(float(bessel.jv(0.0, 2.404825557695773)))
    worst = max(err_series, err_half, zero)
    checks.append(Check("c01.bessel_accuracy",
                        {"series_vs_integral": err_series, "half_integer": err_half, "j0_zero": zero},
                        "<= 1e-9", 1e-9, _status(worst <= 1e-9)))

    nus = cfg["bessel.nu_list"]
    s = int(cfg["bessel.samples"])
    r1 = bessel.vdc_scan(nus, s)
    r2 = bessel.vdc_scan(nus, 2 * s)
    _write(out, "bessel_vdc.csv", r2.to_csv())
    change = {k: abs(r2.max_ratio[k] - r1.max_ratio[k]) / r1.max_ratio[k] for k in r1.max_ratio}
    target = math.sqrt(2 / math.pi)
    asym = {str(k): v[0] for k, v in r2.asymptotic.items()}
    asym_dev = max(abs(v - target) for v in asym.values())
    ok = max(change.values()) < 0.05 and asym_dev <= 0.02
    checks.append(Check("c05.vdc_uniformity",
                        {"max_ratio": r2.max_ratio, "relative_change": change, "asymptotic": asym},
                        {"relative_change": "< 0.05", "asymptotic": target}, {"change": 0.05, "asymptotic": 0.02},
                        _status(ok)))
    checks.append(Check("info.vdc_flags", r2.flags, None, None, INFO))

    pn = cfg["bessel.prodj_nu"]
    p2 = [bessel.prodj_integral(v, 2.0) for v in pn]
    p4 = [bessel.prodj_integral(v, 4.0) for v in pn]
    _write(out, "bessel_prodj.csv", bessel.prodj_csv([(v, 2.0, a) for v, a in zip(pn, p2)]
                                                     + [(v, 4.0, a) for v, a in zip(pn, p4)]))
    spread = max(p2) / min(p2)
    inc = all(b > a for a, b in zip(p4, p4[1:]))
    checks.append(Check("c06.prodj", {"p2": p2, "p2_spread": spread, "p4": p4, "p4_increasing": inc},
                        {"p2_spread": "<= 1.5", "p4": "strictly increasing"}, 1.5, _status(spread <= 1.5 and inc)))
    if fig:
        fig.line("bessel_prodj.png", "prodj integral against order", "nu", "value",
                 {"p=2": (pn, p2), "p=4": (pn, p4)}, logx=True)
    return checks


# --------------------------------------------------------------- kernel-norms
def suite_kernels(cfg, rng, out, fig):
    checks = []
    m = int(cfg["kernels.oracle_points"])
    t = rng.uniform(0.1, 50, m)
    r = rng.uniform(0.1, 50, m)
    near = m // 5
    r[:near] = np.clip(t[:near] + rng.uniform(-1e-4, 1e-4, near), 0.1, 50)
    oracle = (np.sinc((t - r) / np.pi) - np.sin(t + r) / (t + r)) / np.pi
    err = float(np.max(np.abs(kernels.kernel_k(0.5, t, r) - oracle)))
    checks.append(Check("c02.kernel_oracle", {"max_abs_error": err, "near_diagonal_points": near},
                        "<= 1e-8", 1e-8, _status(err <= 1e-8)))

    window = float(cfg["kernels.projection_window"])
    proj = {}
    ok = True
    for k in cfg["kernels.projection_modes"]:
        errs = []
        for rmax, cnt in cfg["kernels.projection_grids"]:
            g = make_grid("linear", float(rmax), int(cnt))
            f = RadialProfile.from_function(g, lambda x, k=k: x ** k * np.exp(-x * x / 2))
            T = kernels.apply_tkn(2, k, f)
            TT = kernels.apply_tkn(2, k, T)
            w = g.weights * g.nodes
            sel = g.nodes <= window
            nrm = lambda v: math.sqrt(float(np.sum(np.abs(v[sel]) ** 2 * w[sel])))
            errs.append(nrm(TT.values - T.values) / nrm(T.values))
        ratios = [b / a for a, b in zip(errs, errs[1:])]
        proj[str(k)] = {"errors": errs, "ratios": ratios}
        ok &= max(errs) <= 0.05 and max(ratios) <= 0.6
    checks.append(Check("c04.projection", proj, {"error": "<= 0.05", "ratio": "<= 0.6 (halving)"},
                        {"error": 0.05, "ratio": 0.6}, _status(ok)))

    nus = cfg["kernels.uniformity_nu"]
    rows = kernels.kj_uniformity_scan(float(cfg["kernels.uniformity_p"]), nus)
    _write(out, "kernels_uniformity.csv", kernels.uniformity_csv(rows))
    by_block: dict = {}
    for row in rows:
        by_block.setdefault(row.block, []).append(row.estimate.value)
    spread = {b: max(v) / min(v) for b, v in by_block.items()}
    checks.append(Check("c07.uniformity", {"estimates": by_block["(c,c)"], "max_over_min": spread["(c,c)"]},
                        "<= 2", 2.0, _status(spread["(c,c)"] <= 2)))
    checks.append(Check("info.uniformity_mixed_blocks",
                        {b: {"estimates": v, "max_over_min": spread[b]} for b, v in by_block.items() if b != "(c,c)"},
                        None, None, INFO))
    if fig:
        fig.line("kernels_uniformity.png", "block norm estimates", "nu", "estimate",
                 {b: (nus, v) for b, v in by_block.items()}, logx=True)
    return checks


# ----------------------------------------------------------------- disc-apply
def suite_disc(cfg, rng, out, fig):
    L = float(cfg["disc.L"])
    Ns = [int(n) for n in cfg["disc.N"]]
    res = {}
    lines = ["k,N,relative_error"]
    ok = True
    for k in cfg["disc.modes"]:
        errs = []
        for N in Ns:
            f = planar.GridField2D.from_function(N, L, lambda x, y, k=k: (x + 1j * y) ** k * np.exp(-(x * x + y * y) / 2))
            g = make_grid("linear", L / 2, N // 2 + 1)
            T = kernels.apply_tkn(2, k, RadialProfile.from_function(g, lambda r, k=k: r ** k * np.exp(-r * r / 2)))
            X, Y = f.coords()
            R = np.hypot(X, Y)
            sel = R <= L / 4
            ref = T(R[sel]) * np.exp(1j * k * np.arctan2(Y[sel], X[sel]))
            got = planar.apply_multiplier(planar.MultiplierSymbol.disc(1.0), f, N // 2).values[sel]
            errs.append(float(np.linalg.norm(got - ref) / np.linalg.norm(ref)))
            lines.append(f"{k},{N},{errs[-1]:.12e}")
        res[str(k)] = errs
        ok &= errs[0] <= 1e-2 and all(b < a for a, b in zip(errs, errs[1:]))
    _write(out, "disc_cross_oracle.csv", "\n".join(lines) + "\n")
    if fig:
        fig.line("disc_cross_oracle.png", "disc multiplier against mode operator", "N", "relative L2 error",
                 {f"k={k}": (Ns, v) for k, v in res.items()}, logx=True, logy=True)
    return [Check("c03.disc_cross_oracle", res, {"first": "<= 1e-2", "refinement": "decreasing"}, 1e-2, _status(ok))]


# ----------------------------------------------------------------- planar-lab
def suite_planar(cfg, rng, out, fig):
    checks = []
    N, L = int(cfg["planar.N"]), float(cfg["planar.L"])
    fit = planar.cube_decay_experiment(2.0, tuple(cfg["planar.r_range"]), N, L, pad=int(cfg["planar.pad"]))
    thr = {p: planar.threshold_check(fit.radii, fit.means, p) for p in (4 / 3, 2.0)}
    _write(out, "planar_cube_decay.csv", "r,angular_l2\n" + "".join(
        f"{a:.12e},{b:.12e}\n" for a, b in zip(fit.radii, fit.means)))
    ok = abs(fit.slope + 1.5) <= 0.1 and thr[4 / 3].diverges and thr[2.0].converges(0.05)
    checks.append(Check("c08.cube_decay", {
        "slope": fit.slope,
        "p4/3": {"increment_ratio": thr[4 / 3].increment_ratio, "diverges": thr[4 / 3].diverges,
                 "integrals": thr[4 / 3].integrals},
        "p2": {"increment_ratio": thr[2.0].increment_ratio, "norm_tail": thr[2.0].norm_tail,
               "integral_tail": thr[2.0].integral_tail, "converges": thr[2.0].converges(0.05)},
    }, {"slope": -1.5, "p4/3": "diverges", "p2": "norm tail < 0.05"}, {"slope": 0.1, "tail": 0.05}, _status(ok)))
    if fig:
        sel = (fit.radii >= 1) & (fit.means > 0)
        fig.line("planar_cube_decay.png", "angular mean of the directional Hilbert transform of a cube", "r", "A(r)",
                 {"A(r)": (fit.radii[sel], fit.means[sel]),
                  "r^-1.5": (fit.radii[sel], math.exp(fit.intercept) * fit.radii[sel] ** -1.5)}, logx=True, logy=True)

    n, Ll = int(cfg["planar.lab_N"]), float(cfg["planar.lab_L"])
    gauss = planar.GridField2D.from_function(n, Ll, lambda x, y: np.exp(-(x * x + y * y) / 2))
    lim = planar.ball_to_halfplane_limit(gauss, 6)
    checks.append(Check("info.ball_to_halfplane", {"errors": lim.errors, "floor": lim.floor, "excess": lim.excess,
                                                   "nonincreasing": lim.nonincreasing()}, None, None, INFO))
    k = int(cfg["planar.meyer_dirs"])
    ang = rng.uniform(0, 2 * np.pi, k)
    cen = rng.uniform(-3, 3, (k, 2))
    batch = [planar.GridField2D.from_function(n, Ll, lambda x, y, c=c: np.exp(-((x - c[0]) ** 2 + (y - c[1]) ** 2)))
             for c in cen]
    meyer = {p: planar.meyer_vector_test(np.c_[np.cos(ang), np.sin(ang)], batch, p).ratio for p in (2.0, 4.0)}
    trials = []
    for _ in range(int(cfg["planar.trials"])):
        c = rng.uniform(-2, 2, 2)
        s = rng.uniform(0.7, 1.5)
        trials.append(planar.GridField2D.from_function(n, Ll, lambda x, y, c=c, s=s: np.exp(-((x - c[0]) ** 2 + (y - c[1]) ** 2) / (2 * s * s))))
    riesz = {p: planar.singular_integral_test({1: 0.5, -1: 0.5}, p, trials).ratio for p in (2.0, 4.0)}
    checks.append(Check("info.vector_and_singular", {"meyer": meyer, "riesz": riesz}, None, None, INFO))
    return checks


# --------------------------------------------------------------------- kakeya
def suite_kakeya(cfg, rng, out, fig):
    g = make_grid("linear", 4.0, int(cfg["kakeya.grid_count"]))
    chi = RadialProfile.from_function(g, lambda r: (r <= 1).astype(float))
    nu, nc = int(cfg["kakeya.n_u"]), int(cfg["kakeya.n_c"])
    val = maximal.universal_kakeya_radial(chi, 2.0, nu, nc)
    deltas = cfg["kakeya.deltas"]
    rows_b = maximal.kakeya_lp_scan(float(cfg["kakeya.p_bounded"]), 2, deltas, nu, nc)
    rows_f = maximal.kakeya_lp_scan(float(cfg["kakeya.p_forbidden"]), 2, deltas, nu, nc)
    _write(out, "kakeya_scan.csv", maximal.scan_csv(rows_b + rows_f))
    rb = [r.ratio for r in rows_b]
    rf = [r.ratio for r in rows_f]
    spread = max(rb) / min(rb)
    growth = rf[-1] / rf[0]
    inc = all(b > a for a, b in zip(rf, rf[1:]))
    ok = abs(val - 2 / 3) <= 1e-3 and spread <= 2 and inc and growth >= 2
    if fig:
        fig.line("kakeya_scan.png", "universal maximal norm ratios", "delta", "ratio",
                 {f"p={cfg['kakeya.p_bounded']:g}": (deltas, rb), f"p={cfg['kakeya.p_forbidden']:g}": (deltas, rf)},
                 logx=True)
    return [Check("c09.kakeya", {"U_chi_at_2": val, "bounded_ratios": rb, "bounded_spread": spread,
                                 "forbidden_ratios": rf, "forbidden_growth": growth},
                  {"U_chi_at_2": 2 / 3, "bounded_spread": "<= 2", "forbidden_growth": ">= 2, increasing"},
                  {"U_chi_at_2": 1e-3}, _status(ok))]


# ---------------------------------------------------------------------- tubes
def suite_tubes(cfg, rng, out, fig):
    R, D, R0, eps = cfg["tubes.thick_2d"]
    s2 = tubes.ShellSpec(2, R, D, R0, eps)
    T2 = tubes.generate_brush(s2)
    ras = tubes.rasterize(T2)
    h2 = tubes.overlap_histogram(T2, raster=ras)
    f2 = tubes.fit_overlap_exponent(h2)
    radii = np.linspace(R, R + D, 7)[1:-1]
    consts = tubes.per_sphere_constants(T2, ras, radii)
    _write(out, "tubes_hist_2d.csv", h2.to_csv())
    R, D, R0, eps = cfg["tubes.thick_3d"]
    s3 = tubes.ShellSpec(3, R, D, R0, eps)
    T3 = tubes.generate_brush(s3)
    r3 = tubes.rasterize(T3)
    h3 = tubes.overlap_histogram(T3, raster=r3)
    f3 = tubes.fit_overlap_exponent(h3)
    c3 = tubes.per_sphere_constants(T3, r3, np.linspace(R, R + D, 7)[1:-1])
    _write(out, "tubes_hist_3d.csv", h3.to_csv())
    Rt, Dt, R0t = cfg["tubes.thin_2d"]
    thin = [tubes.thin_shell_2d(tubes.ShellSpec(2, Rt, Dt, R0t, e)) for e in cfg["tubes.thin_eps"]]
    tr = [t.ratio for t in thin]
    thin_change = abs(tr[-1] - tr[0]) / tr[0]
    spread = float(consts.max() / consts.min())
    ok = abs(f2.slope + 2) <= 0.3 and abs(f3.slope + 1.5) <= 0.3 and spread <= 2 and thin_change < 0.3
    if fig:
        fig.line("tubes_hist.png", "overlap histogram", "d", "measure",
                 {"n=2": (h2.d[h2.measure > 0], h2.measure[h2.measure > 0]),
                  "n=3": (h3.d[h3.measure > 0], h3.measure[h3.measure > 0])}, logx=True, logy=True, marker=".")
    return [
        Check("c10.tubes", {"slope_2d": f2.slope, "slope_3d": f3.slope, "per_sphere_2d": consts,
                            "per_sphere_spread": spread, "thin_ratios": tr, "thin_change": thin_change,
                            "tube_counts": [len(T2), len(T3)]},
              {"slope_2d": -2, "slope_3d": -1.5, "per_sphere_spread": "<= 2", "thin_change": "< 0.3"},
              {"slope": 0.3}, _status(ok)),
        Check("info.per_sphere_3d", {"constants": c3, "spread": float(c3.max() / c3.min())}, None, None, INFO),
    ]


# -------------------------------------------------------------------- weights
def suite_weights(cfg, rng, out, fig):
    one = weights.ap_characteristic(weights.WeightSamples.from_function(np.ones_like, 1024), 2.0).value
    half = weights.power_characteristics(0.5, 2.0, cfg["weights.levels"])
    half_change = max(abs(b - a) / a for a, b in zip(half, half[1:]))
    lin = weights.power_characteristics(1.0, 2.0, cfg["weights.coarse_fine"])
    lin_growth = lin[-1] / lin[0]
    a1_levels = cfg["weights.a1_levels"]
    a1 = {"chi01_s2": weights.a1_lemma_check(lambda x: ((x >= 0) & (x <= 1)).astype(float), 2.0, a1_levels, X=4.0).trace}
    for i in range(int(cfg["weights.step_trials"])):
        edges = np.sort(rng.uniform(-1, 1, 5))
        vals = rng.uniform(0.1, 3.0, 6)
        a1[f"step{i}_s4/3"] = weights.a1_lemma_check(lambda x, e=edges, v=vals: v[np.searchsorted(e, x)], 4 / 3, a1_levels).trace
    a1_change = max(abs(b - a) / a for tr in a1.values() for a, b in zip(tr, tr[1:]))
    lo, val, up = weights.sandwich_check(-0.5, 1.5, cfg["weights.sandwich_x"])
    sandwich = bool(np.all(lo <= val) and np.all(val <= up))
    parts = {"ap_constant": one == 1.0, "half_stable": half_change < 0.05, "linear_growth": lin_growth >= 2,
             "a1_stable": a1_change < 0.1, "sandwich": sandwich}
    rows, sw = weights.power_weight_range_scan(2.0, cfg["weights.alphas"])
    _write(out, "weights_power_scan.csv", weights.power_rows_csv(rows))
    if fig:
        series = {}
        for row in rows:
            series.setdefault(f"alpha={row.alpha:g}", ([], []))
            series[f"alpha={row.alpha:g}"][0].append(row.nodes)
            series[f"alpha={row.alpha:g}"][1].append(row.characteristic)
        fig.line("weights_power_scan.png", "A_2 characteristic of |x|^alpha", "cells", "characteristic", series,
                 logx=True, logy=True)
    return [
        Check("c11.weights", {"ap_constant": one, "half_trace": half, "half_change": half_change,
                              "linear_trace": lin, "linear_growth": lin_growth, "a1_traces": a1,
                              "a1_change": a1_change, "sandwich": {"lower": lo, "value": val, "upper": up},
                              "parts": parts},
              {"ap_constant": 1, "half_change": "< 0.05", "linear_growth": ">= 2", "a1_change": "< 0.1",
               "sandwich": "holds"}, None, _status(all(parts.values()))),
        Check("info.power_classification", {f"{r.alpha:g}": r.classification for r in rows if r.level == 0},
              None, None, INFO),
    ]


# ---------------------------------------------------------------- restriction
def suite_restriction(cfg, rng, out, fig):
    q = float(cfg["restriction.q"])
    Ms = cfg["restriction.M"]
    rep = restriction.dyadic_block_scan(q, Ms)
    _write(out, "restriction_blocks.csv", rep.to_csv())
    _write(out, "restriction_fit.json", rep.to_json() + "\n")
    pred = restriction.predicted_slopes(q)
    tol = {"I1": 0.15, "I2": 0.2, "I3": 0.3}
    slopes = {k: rep.slopes[k].slope for k in restriction.BLOCKS}
    a0 = restriction.HarmonicCoefficients({0: 1.0})
    rmax = float(cfg["restriction.ext_rmax"])
    e5 = [restriction.extension_mixed_norm(a0, 5.0, rmax), restriction.extension_mixed_norm(a0, 5.0, 2 * rmax)]
    e4 = restriction.extension_mixed_norm(a0, 4.0, rmax)
    stable5 = abs(e5[1].value - e5[0].value) / e5[0].value < 0.05 and not e5[1].diverges
    parts = {k: abs(slopes[k] - pred[k]) <= tol[k] for k in slopes}
    parts["q5_stable"] = stable5
    parts["q4_flagged"] = e4.diverges
    n3 = {q3: restriction.general_dimension_block(3, q3, cfg["restriction.n3_M"]) for q3 in (4.0, 2.9)}
    if fig:
        series = {k: (Ms, [math.exp(v.log_normalized(k, q)) for v in rep.values]) for k in ("I1", "I2")}
        fig.line("restriction_blocks.png", "normalized block values", "M", "value", series, logx=True, logy=True)
    return [
        Check("c12.restriction", {"slopes": slopes, "single_mode_I2": rep.single_mode.slope,
                                  "raw_slopes": {k: v.slope for k, v in rep.raw_slopes.items()},
                                  "q5_norms": [e.value for e in e5], "q5_tail_slope": e5[1].tail_slope,
                                  "q4_tail_slope": e4.tail_slope, "parts": parts},
              {"slopes": pred, "q5": "change < 0.05", "q4": "divergence flag"},
              {"I1": 0.15, "I2": 0.2, "I3": 0.3, "q5": 0.05}, _status(all(parts.values()))),
        Check("info.general_dimension", {f"n=3,q={k:g}": {"slope": v.fit.slope, "predicted": v.predicted}
                                         for k, v in n3.items()}, None, None, INFO),
    ]


PREFIX = {
    "bessel-check": "bessel_",
    "kernel-norms": "kernels_",
    "disc-apply": "disc_",
    "planar-lab": "planar_",
    "kakeya": "kakeya_",
    "tubes": "tubes_",
    "weights": "weights_",
    "restriction": "restriction_",
}

RUNNERS: dict[str, Callable] = {
    "bessel-check": suite_bessel,
    "kernel-norms": suite_kernels,
    "disc-apply": suite_disc,
    "planar-lab": suite_planar,
    "kakeya": suite_kakeya,
    "tubes": suite_tubes,
    "weights": suite_weights,
    "restriction": suite_restriction,
}


# ------------------------------------------------------------------- driver
@dataclass
class SuiteReport:
    suite: str
    config: dict
    checks: list
    timings: dict

    def to_dict(self) -> dict:
        return {"suite": self.suite, "config": _jsonable(self.config),
                "checks": [c.to_dict() for c in sorted(self.checks, key=lambda c: c.id)],
                "runtime_seconds": None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @property
    def failed(self) -> list:
        return [c.id for c in self.checks if c.status == FAIL]


def _digest(out: Path, names) -> str:
    h = hashlib.sha256()
    for name in sorted(names):
        h.update(name.encode())
        h.update((out / name).read_bytes())
    return h.hexdigest()


def run_suite(suite: str, config: dict | None = None, seed: int = 0, out: Path | str = "out",
              figures: bool = True) -> SuiteReport:
    """Run a suite (or ``all``) and write its data, figures, report and timing sidecar."""
    if suite != ALL and suite not in RUNNERS:
        raise ParameterError(f"unknown suite {suite!r}")
    cfg = default_config(suite)
    unknown = set(config or {}) - set(cfg) - {"seed"}
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    cfg.update(config or {})
    cfg["seed"] = int(seed)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    fig = None
    if figures:
        from .figures import FigureWriter
        fig = FigureWriter(out)
    names = SUITES if suite == ALL else [suite]
    checks, timings = [], {}
    for name in names:
        rng = np.random.default_rng([int(seed), SUITES.index(name)])
        t0 = time.perf_counter()
        checks += RUNNERS[name](cfg, rng, out, fig)
        timings[name] = time.perf_counter() - t0
    data = [p.name for p in out.iterdir()
            if p.suffix in (".csv", ".json") and p.name.startswith(tuple(PREFIX[n] for n in names))
            and not p.name.endswith(("_report.json", "_timing.json"))]
    checks.append(Check("c13.output_digest", _digest(out, data), None, None, INFO))
    rep = SuiteReport(suite, cfg, checks, timings)
    (out / f"{suite}_report.json").write_text(rep.to_json())
    (out / f"{suite}_timing.json").write_text(json.dumps({k: round(v, 3) for k, v in timings.items()}, indent=2) + "\n")
    return rep
