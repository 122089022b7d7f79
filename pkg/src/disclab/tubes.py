"""Brush configurations of tubes in spherical shells and their overlap statistics.

The NS axis is the last coordinate axis.  Every tube axis starts on the
outer sphere ``|x| = R + Delta``, lies on a line tangent to ``|y| = R0``
that meets the NS axis, and ends where it first reaches ``|y| = R``.
Tubes have width ``eps`` (radius ``eps/2``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import FitError, GeometryError, ParameterError

CELL_CAP = 1 << 28


@dataclass(frozen=True)
class ShellSpec:
    n: int
    R: float
    delta: float
    R0: float
    eps: float
    lat_max: float = math.pi / 4

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ParameterError("n must be 2 or 3")
        if not (self.R > 0 and self.delta > 0 and self.eps > 0 and self.R0 > 0):
            raise ParameterError("radii, thickness and width must be positive")
        if self.eps > self.delta / 16:
            raise ParameterError("need eps <= delta/16")
        if self.R0 > self.R:
            raise GeometryError("tangency radius exceeds the inner radius; no tangent segment spans the shell")

    @property
    def kind(self) -> str:
        return "thin" if self.delta < self.R / 2 else "thick"

    @property
    def outer(self) -> float:
        return self.R + self.delta


@dataclass
class TubeSet:
    starts: np.ndarray
    ends: np.ndarray
    eps: float
    spec: ShellSpec

    def __len__(self):
        return len(self.starts)

    def lengths(self) -> np.ndarray:
        return np.linalg.norm(self.ends - self.starts, axis=1)

    def residuals(self) -> dict:
        """Largest violations of the tube invariants."""
        s = self.spec
        d = self.ends - self.starts
        d = d / np.linalg.norm(d, axis=1)[:, None]
        foot = self.starts - np.sum(self.starts * d, axis=1)[:, None] * d
        out = {
            "outer": float(np.max(np.abs(np.linalg.norm(self.starts, axis=1) - s.outer))),
            "inner": float(np.max(np.abs(np.linalg.norm(self.ends, axis=1) - s.R))),
            "tangency": float(np.max(np.abs(np.linalg.norm(foot, axis=1) - s.R0))),
        }
        # distance between each axis line and the NS axis e_n
        e = np.zeros(s.n)
        e[-1] = 1.0
        if s.n == 2:
            # coplanar lines meet unless parallel; residual = |sin angle| deficit
            out["ns_axis"] = float(np.max(np.where(np.abs(d[:, 0]) > 1e-12, 0.0, 1.0)))
        else:
            cr = np.cross(d, e)
            out["ns_axis"] = float(np.max(np.abs(np.sum(self.starts * cr, axis=1)) / np.linalg.norm(cr, axis=1)))
        return out

    def to_json(self) -> str:
        return json.dumps({"eps": self.eps,
                           "tubes": [[a.tolist(), b.tolist()] for a, b in zip(self.starts, self.ends)]})


def _plane_segments(spec: ShellSpec, psi: np.ndarray):
    """Segments in the meridian plane for outer points at polar angles psi.

    Plane coordinates are (a, z) with z along the NS axis; psi is measured
    from the a-axis.
    """
    Ro, R, R0 = spec.outer, spec.R, spec.R0
    x = Ro * np.stack([np.cos(psi), np.sin(psi)], axis=1)
    beta = math.acos(R0 / Ro)
    best_d = np.empty_like(x)
    best_z = np.full(len(psi), -np.inf)
    for sgn in (1.0, -1.0):
        ang = psi + sgn * beta
        T = R0 * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        d = T - x
        d /= np.linalg.norm(d, axis=1)[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            zc = np.where(np.abs(d[:, 0]) > 1e-12, x[:, 1] - x[:, 0] / d[:, 0] * d[:, 1], -np.inf)
        take = zc > best_z
        best_d[take] = d[take]
        best_z[take] = zc[take]
    xd = np.sum(x * best_d, axis=1)
    s = -xd - np.sqrt(np.maximum(xd * xd - Ro * Ro + R * R, 0.0))
    return x, x + s[:, None] * best_d


def generate_brush(spec: ShellSpec) -> TubeSet:
    """Tubes with outer footprints at least eps apart.

    n = 2: outer points equally spaced by arc length eps around the circle.
    n = 3: meridian planes through the NS axis, and in each plane outer points
    eps-spaced in latitude up to ``lat_max``; planes are spaced so that
    footprints stay eps apart up to that latitude.
    """
    Ro = spec.outer
    if spec.n == 2:
        m = int(math.floor(2 * math.pi * Ro / spec.eps))
        psi = 2 * math.pi * np.arange(m) / m
        a, b = _plane_segments(spec, psi)
        return TubeSet(a, b, spec.eps, spec)
    dlat = spec.eps / Ro
    k = int(math.floor(spec.lat_max / dlat))
    lat = dlat * np.arange(-k, k + 1)
    m = int(math.floor(2 * math.pi * Ro * math.cos(spec.lat_max) / spec.eps))
    starts, ends = [], []
    # psi measured from the positive a-direction in each half-plane
    a, b = _plane_segments(spec, lat)
    for j in range(m):
        th = 2 * math.pi * j / m
        u = np.array([math.cos(th), math.sin(th), 0.0])
        e = np.array([0.0, 0.0, 1.0])
        starts.append(a[:, :1] * u + a[:, 1:] * e)
        ends.append(b[:, :1] * u + b[:, 1:] * e)
    return TubeSet(np.concatenate(starts), np.concatenate(ends), spec.eps, spec)


# --------------------------------------------------------------- raster
def _tube_cells(a, b, radius, h, lo, shape):
    """Indices of raster cells whose centres lie in the tube around segment [a, b]."""
    n = a.size
    d = b - a
    length = float(np.linalg.norm(d))
    d = d / length
    shape = np.asarray(shape)
    # sweep slabs along the dominant axis; in each slab the tube section
    # lies within a box of half-width spread_k around the axis point
    ax = int(np.argmax(np.abs(d)))
    da = d[ax]
    ext = radius / abs(da) + h
    lo_ax = min(a[ax], b[ax]) - ext
    hi_ax = max(a[ax], b[ax]) + ext
    i_ax = np.arange(max(int(math.floor((lo_ax - lo[ax]) / h)), 0),
                     min(int(math.ceil((hi_ax - lo[ax]) / h)), shape[ax] - 1) + 1)
    t = (lo[ax] + (i_ax + 0.5) * h - a[ax]) / da
    parts = [i_ax[:, None]]
    for k in range(n):
        if k == ax:
            continue
        spread = 0.5 * h * abs(d[k] / da) + (radius + h) / abs(da)
        pk = a[k] + t * d[k]
        start = np.floor((pk - spread - lo[k]) / h).astype(int)
        width = int(math.ceil(2 * spread / h)) + 2
        parts.append(start[:, None] + np.arange(width)[None, :])
    # cartesian product per slab
    if n == 2:
        other = parts[1]
        g = np.empty((other.size, 2), dtype=int)
        g[:, ax] = np.repeat(i_ax, other.shape[1])
        g[:, 1 - ax] = other.reshape(-1)
    else:
        ks = [k for k in range(3) if k != ax]
        p1, p2 = parts[1], parts[2]
        w1, w2 = p1.shape[1], p2.shape[1]
        g = np.empty((len(i_ax) * w1 * w2, 3), dtype=int)
        g[:, ax] = np.repeat(i_ax, w1 * w2)
        g[:, ks[0]] = np.repeat(p1, w2, axis=1).reshape(-1)
        g[:, ks[1]] = np.tile(p2, (1, w1)).reshape(-1)
    ok = np.all((g >= 0) & (g < shape), axis=1)
    g = g[ok]
    centers = lo + (g + 0.5) * h
    rel = centers - a
    s = rel @ d
    perp2 = np.sum(rel * rel, axis=1) - s * s
    keep = (s >= 0) & (s <= length) & (perp2 <= radius * radius)
    return g[keep]


@dataclass
class Raster:
    counts: np.ndarray
    h: float
    lo: np.ndarray

    def radii(self) -> np.ndarray:
        axes = [self.lo[k] + (np.arange(self.counts.shape[k]) + 0.5) * self.h for k in range(self.counts.ndim)]
        mesh = np.meshgrid(*axes, indexing="ij", sparse=True)
        return np.sqrt(sum(m * m for m in mesh))


@dataclass
class OverlapHistogram:
    d: np.ndarray
    measure: np.ndarray
    n: int
    total_tube_volume: float
    raster_volume: float

    def to_csv(self) -> str:
        return "d,measure\n" + "".join(f"{int(k)},{m:.12e}\n" for k, m in zip(self.d, self.measure))


def rasterize(tubes: TubeSet, h: float | None = None) -> Raster:
    s = tubes.spec
    h = tubes.eps / 4 if h is None else h
    if h > tubes.eps / 4 * (1 + 1e-12):
        raise ParameterError("need h <= eps/4")
    Ro = s.outer
    side = int(math.ceil(2 * (Ro + h) / h))
    if side ** s.n > CELL_CAP:
        raise ParameterError(f"raster of {side}^{s.n} cells exceeds the cap 2^28")
    lo = np.full(s.n, -side * h / 2)
    counts = np.zeros((side,) * s.n, dtype=np.uint16)
    flat = counts.reshape(-1)
    strides = np.array([side ** (s.n - 1 - k) for k in range(s.n)])
    for a, b in zip(tubes.starts, tubes.ends):
        g = _tube_cells(a, b, tubes.eps / 2, h, lo, counts.shape)
        flat[g @ strides] += 1
    return Raster(counts, h, lo)


def _tube_volume(length, eps, n):
    return length * eps if n == 2 else length * math.pi * (eps / 2) ** 2


def overlap_histogram(tubes: TubeSet, h: float | None = None, raster: Raster | None = None) -> OverlapHistogram:
    """Measures of {sum of tube indicators >= d} for d = 1, 2, ..."""
    r = rasterize(tubes, h) if raster is None else raster
    n = tubes.spec.n
    c = r.counts.reshape(-1)
    top = int(c.max())
    hist = np.bincount(c, minlength=top + 1)
    at_least = np.cumsum(hist[::-1])[::-1]
    cell = r.h ** n
    d = np.arange(1, top + 1)
    vol = float(np.sum(_tube_volume(tubes.lengths(), tubes.eps, n)))
    return OverlapHistogram(d, at_least[1:] * cell, n, vol, float(np.sum(c, dtype=np.int64)) * cell)


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    levels: int


def fit_overlap_exponent(hist: OverlapHistogram, d_min: int = 1) -> ExponentFit:
    """Least-squares slope of log measure against log d over nonzero levels d >= d_min."""
    m = (hist.measure > 0) & (hist.d >= d_min)
    if m.sum() < 4:
        raise FitError("need at least four nonzero histogram levels")
    A = np.vstack([np.log(hist.d[m]), np.ones(m.sum())]).T
    coef, *_ = np.linalg.lstsq(A, np.log(hist.measure[m]), rcond=None)
    return ExponentFit(float(coef[0]), float(coef[1]), int(m.sum()))


def per_sphere_constants(tubes: TubeSet, raster: Raster, radii) -> np.ndarray:
    """max overlap on |x| = r divided by ((R + Delta)/r)^(n-1), for each r."""
    s = tubes.spec
    rr = raster.radii()
    out = []
    for r in radii:
        shell = np.abs(rr - r) <= raster.h / 2
        top = float(raster.counts[shell].max()) if shell.any() else 0.0
        out.append(top / (s.outer / r) ** (s.n - 1))
    return np.array(out)


@dataclass
class ThinShellResult:
    hist: OverlapHistogram
    ratio: float
    argmax_d: int


def thin_shell_2d(spec: ShellSpec, h: float | None = None) -> ThinShellResult:
    """max_d measure(d) d^2 / (Delta R) for the planar brush in a thin shell."""
    if spec.n != 2 or spec.kind != "thin":
        raise ParameterError("thin_shell_2d needs n = 2 and Delta < R/2")
    hist = overlap_histogram(generate_brush(spec), h)
    vals = hist.measure * hist.d ** 2 / (spec.delta * spec.R)
    i = int(np.argmax(vals))
    return ThinShellResult(hist, float(vals[i]), int(hist.d[i]))
