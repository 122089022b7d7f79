"""Maximal functions on grids and the universal Kakeya maximal function of radial functions.

For radial ``f`` a segment through ``x`` (``|x| = rho``) lies on a line at
distance ``u <= rho`` from the origin.  In the chord coordinate ``c`` of
that line ``f = f_rad(sqrt(u^2 + c^2))`` and ``x`` sits at
``c0 = sqrt(rho^2 - u^2)``, so the segment average is a one-dimensional
average over ``[c1, c2]`` with ``c1 <= c0 <= c2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError
from .grids import RadialGrid, RadialProfile


def hl_max_1d(samples, index: int) -> float:
    """Largest mean of ``samples[i..j]`` over all ``i <= index <= j``."""
    a = np.asarray(samples, dtype=float)
    if a.ndim != 1 or not 0 <= index < a.size:
        raise ParameterError("index out of range")
    if np.any(a < 0):
        raise ParameterError("samples must be nonnegative")
    S = np.concatenate([[0.0], np.cumsum(a)])
    i = np.arange(index + 1)[:, None]
    j = np.arange(index, a.size)[None, :]
    return float(np.max((S[j + 1] - S[i]) / (j - i + 1)))


def hl_max_1d_all(samples) -> np.ndarray:
    """hl_max_1d at every index (quadratic work per point)."""
    a = np.asarray(samples, dtype=float)
    return np.array([hl_max_1d(a, i) for i in range(a.size)])


@dataclass(frozen=True)
class MaximalQuery:
    profile: RadialProfile
    rho: float
    n_u: int = 64
    n_c: int = 256

    def __post_init__(self):
        if self.n_u < 32 or self.n_c < 32:
            raise ParameterError("resolution counts must be >= 32")
        if not 0 <= self.rho <= self.profile.grid.r_max / 2:
            raise ParameterError("rho must lie in [0, r_max/2]")


def _fine_step(grid: RadialGrid) -> float:
    return float(np.min(np.diff(grid.nodes))) / 2


class _LineIntegrals:
    """Cumulative integrals of f_rad(sqrt(u^2 + c^2)) on a fixed chord grid."""

    def __init__(self, profile: RadialProfile, max_points: int = 1 << 15):
        self.profile = profile
        self.C = profile.grid.r_max
        hc = max(_fine_step(profile.grid), 2 * self.C / max_points)
        m = int(math.ceil(self.C / hc))
        self.c = np.linspace(-m * hc, m * hc, 2 * m + 1)

    def cumulative(self, u: float):
        r = np.sqrt(u * u + self.c ** 2)
        v = np.abs(self.profile(r))
        G = np.concatenate([[0.0], np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(self.c))])
        return G


def _chord_sup(lines: _LineIntegrals, rho: float, us, n_c: int) -> float:
    best = float(abs(lines.profile(np.array([rho]))[0]))
    C = lines.C
    for u in us:
        if u > rho:
            continue
        c0 = math.sqrt(max(rho * rho - u * u, 0.0))
        span = math.sqrt(max(C * C - u * u, 0.0))
        if span <= c0:
            continue
        G = lines.cumulative(u)
        c1 = c0 - (c0 + span) * np.arange(n_c + 1) / n_c
        c2 = c0 + (span - c0) * np.arange(n_c + 1) / n_c
        G1 = np.interp(c1, lines.c, G)
        G2 = np.interp(c2, lines.c, G)
        length = c2[None, :] - c1[:, None]
        with np.errstate(invalid="ignore", divide="ignore"):
            avg = np.where(length > 0, (G2[None, :] - G1[:, None]) / length, 0.0)
        best = max(best, float(np.max(avg)))
    return best


def universal_kakeya_radial(q: MaximalQuery | RadialProfile, rho: float | None = None,
                            n_u: int = 64, n_c: int = 256, _lines=None) -> float:
    """Discrete lower bound for the universal Kakeya maximal function at radius rho.

    Candidate line distances are ``u = rho j / n_u`` and candidate endpoints
    split ``[-C, c0]`` and ``[c0, C]`` into ``n_c`` equal steps, so doubling
    either count refines the candidate set and never lowers the value.
    """
    if isinstance(q, RadialProfile):
        q = MaximalQuery(q, rho, n_u, n_c)
    lines = _lines or _LineIntegrals(q.profile)
    us = q.rho * np.arange(q.n_u + 1) / q.n_u
    return _chord_sup(lines, q.rho, us, q.n_c)


def radial_direction_max(profile: RadialProfile, rho: float, n_c: int = 256, _lines=None) -> float:
    """Maximal average along the ray direction x/|x| (the u = 0 line)."""
    if not 0 <= rho <= profile.grid.r_max / 2:
        raise ParameterError("rho must lie in [0, r_max/2]")
    lines = _lines or _LineIntegrals(profile)
    return _chord_sup(lines, rho, [0.0], n_c)


@dataclass
class ScanRow:
    n: int
    p: float
    delta: float
    norm_f: float
    norm_Uf: float
    ratio: float | None
    resolution: str

    def csv(self) -> str:
        ratio = "" if self.ratio is None else f"{self.ratio:.12e}"
        return f"{self.n},{self.p:g},{self.delta:.12e},{self.norm_f:.12e},{self.norm_Uf:.12e},{ratio},{self.resolution}"


def scan_csv(rows) -> str:
    return "n,p,delta,norm_f,norm_Uf,ratio,resolution\n" + "".join(r.csv() + "\n" for r in rows)


def sharpness_profile(delta: float, p: float, n: int, r_max: float = 4.0, count: int = 256) -> RadialProfile:
    """f_delta(r) = r^(-n/p) on [delta, 1], zero elsewhere, on a grid graded towards delta."""
    if not 0 < delta < 1:
        raise ParameterError("delta must lie in (0, 1)")
    inner = np.linspace(0.0, delta, 17)[:-1]
    mid = np.geomspace(delta, 1.0, count)
    # a node just past r = 1 keeps the jump one cell wide
    outer = np.linspace(1.0, r_max, count)[1:]
    nodes = np.concatenate([inner, mid, outer])
    vals = np.where((nodes >= delta) & (nodes <= 1.0), np.maximum(nodes, delta) ** (-n / p), 0.0)
    return RadialProfile(RadialGrid.from_nodes(nodes), vals)


def _radial_norm(r, v, p, n):
    return float(np.trapezoid(np.abs(v) ** p * r ** (n - 1), r) ** (1 / p))


def _rho_nodes(profile: RadialProfile, count: int):
    R = profile.grid.r_max / 2
    r0 = max(float(profile.grid.nodes[1]), 1e-3 * R)
    return np.concatenate([[0.0], np.geomspace(r0, R, count)])


def maximal_norm_ratio(profile: RadialProfile, p: float, n: int, kind: str = "kakeya",
                       n_u: int = 64, n_c: int = 256, rho_count: int = 96):
    """(||f||_p, ||Mf||_p) under r^(n-1) dr on [0, r_max/2] for M the universal or ray maximal function."""
    if p <= 1 or n < 2:
        raise ParameterError("need p > 1 and n >= 2")
    lines = _LineIntegrals(profile)
    rho = _rho_nodes(profile, rho_count)
    if kind == "kakeya":
        M = np.array([universal_kakeya_radial(profile, x, n_u, n_c, _lines=lines) for x in rho])
    elif kind == "ray":
        M = np.array([radial_direction_max(profile, x, n_c, _lines=lines) for x in rho])
    else:
        raise ParameterError(f"unknown maximal kind {kind!r}")
    g = profile.grid
    mask = g.nodes <= rho[-1]
    nf = _radial_norm(g.nodes[mask], profile.values[mask], p, n)
    return nf, _radial_norm(rho, M, p, n), rho, M


def kakeya_lp_scan(p: float, n: int, deltas: Sequence[float] = (1 / 4, 1 / 16, 1 / 64),
                   n_u: int = 64, n_c: int = 256, profiles=None) -> list:
    """Norm ratios ||U f_delta||_p / ||f_delta||_p for the sharpness family."""
    rows = []
    for i, d in enumerate(deltas):
        prof = sharpness_profile(d, p, n) if profiles is None else profiles[i]
        nf, nu, _, _ = maximal_norm_ratio(prof, p, n, "kakeya", n_u, n_c)
        rows.append(ScanRow(n, p, d, nf, nu, nu / nf if nf > 0 else None, f"{n_u}x{n_c}"))
    return rows


def radial_field_max_test(profile: RadialProfile, p: float, n: int, n_c: int = 256) -> float | None:
    """||M_v f||_p / ||f||_p for the field v(x) = x/|x| (maximal averages along rays)."""
    nf, nm, _, _ = maximal_norm_ratio(profile, p, n, "ray", n_c=n_c)
    return nm / nf if nf > 0 else None
