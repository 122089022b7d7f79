"""Radial grids, profiles, mode containers and mixed norms.

Every radial quantity in the package lives on a :class:`RadialGrid` and is
integrated with the composite trapezoid rule attached to that grid.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np

from .errors import ParameterError, StructuralError

SCHEMES = ("linear", "hybrid")


def trapezoid_weights(nodes: np.ndarray) -> np.ndarray:
    """Composite trapezoid weights for arbitrary increasing nodes."""
    nodes = np.asarray(nodes, dtype=float)
    w = np.zeros_like(nodes)
    d = np.diff(nodes)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    weights: np.ndarray
    scheme: str = "linear"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2 or nodes.shape != weights.shape:
            raise ParameterError("nodes and weights must be 1-d arrays of equal length")
        if nodes[0] < 0 or np.any(np.diff(nodes) <= 0):
            raise ParameterError("nodes must be nonnegative and strictly increasing")
        if np.any(weights <= 0):
            raise ParameterError("quadrature weights must be positive")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @property
    def size(self) -> int:
        return self.nodes.size

    def integrate(self, values) -> complex | float:
        return np.dot(self.weights, values)

    def refine(self) -> "RadialGrid":
        """Insert midpoints, doubling the number of intervals."""
        mid = 0.5 * (self.nodes[1:] + self.nodes[:-1])
        nodes = np.empty(2 * self.size - 1)
        nodes[0::2] = self.nodes
        nodes[1::2] = mid
        return RadialGrid(nodes, trapezoid_weights(nodes), self.scheme)

    @classmethod
    def from_nodes(cls, nodes, scheme="linear") -> "RadialGrid":
        nodes = np.asarray(nodes, dtype=float)
        return cls(nodes, trapezoid_weights(nodes), scheme)


def make_grid(scheme: str, r_max: float, count: int, r_lin: float | None = None,
              r_min: float = 0.0) -> RadialGrid:
    """Build a radial grid.

    Parameters
    ----------
    scheme : {"linear", "hybrid"}
        ``hybrid`` is uniform on ``[r_min, r_lin]`` and geometric beyond.
    r_max : float
        Last node.
    count : int
        Number of nodes, at least 16.
    r_lin : float, optional
        End of the uniform part (hybrid only).
    """
    if scheme not in SCHEMES:
        raise ParameterError(f"unknown grid scheme {scheme!r}")
    if not (r_max > r_min >= 0) or count < 16 or int(count) != count:
        raise ParameterError("need r_max > r_min >= 0 and an integer count >= 16")
    count = int(count)
    if scheme == "linear":
        nodes = np.linspace(r_min, r_max, count)
    else:
        if r_lin is None or not (r_min < r_lin < r_max):
            raise ParameterError("hybrid grid needs r_min < r_lin < r_max")
        m = count // 2 + 1
        lin = np.linspace(r_min, r_lin, m)
        geo = np.geomspace(r_lin, r_max, count - m + 1)[1:]
        nodes = np.concatenate([lin, geo])
    nodes[-1] = r_max
    return RadialGrid(nodes, trapezoid_weights(nodes), scheme)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Complex samples on a radial grid, interpolated piecewise linearly."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.nodes.shape:
            raise StructuralError("profile length does not match its grid")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: RadialGrid, func) -> "RadialProfile":
        return cls(grid, np.asarray(func(grid.nodes), dtype=complex))

    def __call__(self, r):
        """Evaluate by linear interpolation; zero beyond ``r_max``."""
        r = np.asarray(r, dtype=float)
        nodes = self.grid.nodes
        re = np.interp(r, nodes, self.values.real, right=0.0)
        im = np.interp(r, nodes, self.values.imag, right=0.0)
        return re + 1j * im

    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    def scaled(self, c) -> "RadialProfile":
        return RadialProfile(self.grid, c * self.values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("r,re,im\n")
        for r, v in zip(self.grid.nodes, self.values):
            buf.write(f"{r:.16e},{v.real:.16e},{v.imag:.16e}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, scheme="linear") -> "RadialProfile":
        rows = list(csv.DictReader(io.StringIO(text)))
        r = np.array([float(row["r"]) for row in rows])
        v = np.array([float(row["re"]) + 1j * float(row["im"]) for row in rows])
        return cls(RadialGrid.from_nodes(r, scheme), v)


def _binom(a: int, b: int) -> int:
    if a < 0 or b < 0 or b > a:
        return 0
    return math.comb(a, b)


def harmonic_dimension(n: int, k: int) -> int:
    """Dimension of degree-k spherical harmonics on the sphere in R^n."""
    return _binom(n + k - 1, k) - _binom(n + k - 3, k - 2)


@dataclass(frozen=True, order=True)
class ModeIndex:
    k: int
    ell: int
    n: int

    def __post_init__(self):
        if self.n < 2 or self.k < 0:
            raise ParameterError("need n >= 2 and k >= 0")
        d = harmonic_dimension(self.n, self.k)
        if not 1 <= self.ell <= d:
            raise ParameterError(f"ell={self.ell} outside 1..{d}")

    @property
    def d_k(self) -> int:
        return harmonic_dimension(self.n, self.k)

    @property
    def order(self) -> float:
        """Bessel order k - 1 + n/2 attached to this mode."""
        return self.k - 1 + self.n / 2


@dataclass(frozen=True, eq=False)
class ModeFunction:
    modes: Mapping[ModeIndex, RadialProfile]
    n: int

    def __post_init__(self):
        if not self.modes:
            raise StructuralError("mode function needs at least one mode")
        first = next(iter(self.modes.values())).grid
        for p in self.modes.values():
            if not _same_grid(p.grid, first):
                raise StructuralError("all modes must share one grid")
        if any(m.n != self.n for m in self.modes):
            raise StructuralError("mode dimensions disagree")

    @property
    def grid(self) -> RadialGrid:
        return next(iter(self.modes.values())).grid

    def angular_l2(self) -> np.ndarray:
        """Pointwise (sum |f_k^l(r)|^2)^(1/2)."""
        sq = sum(np.abs(p.values) ** 2 for p in self.modes.values())
        return np.sqrt(sq)

    @classmethod
    def single(cls, profile: RadialProfile, n: int, k: int = 0, ell: int = 1):
        return cls({ModeIndex(k, ell, n): profile}, n)


def _same_grid(a: RadialGrid, b: RadialGrid) -> bool:
    return a is b or (a.size == b.size and np.array_equal(a.nodes, b.nodes))


@dataclass(frozen=True)
class NormParams:
    p: float
    n: int = 2
    q: float | None = None
    s: float | None = None
    s_prime: float | None = None

    def __post_init__(self):
        if not (1 < self.p < math.inf):
            raise ParameterError("p must lie in (1, inf)")
        if self.s is not None and self.s_prime is not None:
            if abs(1 / self.s + 1 / self.s_prime - 1) > 1e-12:
                raise ParameterError("s and s' are not conjugate")
        if self.q is not None and abs(2 / self.p + 1 / self.q - 1) > 1e-12:
            raise ParameterError("q does not satisfy 2/p + 1/q = 1")


class NormValue(NamedTuple):
    value: float
    divergent: bool = False

    def __float__(self):
        return float(self.value)


def mixed_norm(f: ModeFunction, params: NormParams | float) -> float:
    """L^p_rad L^2_ang norm with radial measure r^(n-1) dr."""
    p = params.p if isinstance(params, NormParams) else float(params)
    if not np.isfinite(p) or p <= 0:
        raise ParameterError("p must be finite and positive")
    if isinstance(params, NormParams) and params.n != f.n:
        raise StructuralError("norm dimension differs from the function's")
    g = f.grid
    integrand = f.angular_l2() ** p * g.nodes ** (f.n - 1)
    return float(g.integrate(integrand)) ** (1 / p)


def weighted_lp_norm(g: RadialProfile, p: float, alpha: float) -> NormValue:
    """(int |g|^p r^alpha dr)^(1/p) on the profile's grid.

    For ``alpha < 0`` and a grid starting at 0 the first cell is integrated
    with the exact moments of ``r^alpha`` against the linear interpolant of
    ``|g|^p``.  A nonzero ``g(0)`` with ``alpha <= -1`` flags divergence.
    """
    if p < 1:
        raise ParameterError("p must be >= 1")
    r = g.grid.nodes
    a = np.abs(g.values) ** p
    if alpha >= 0 or r[0] > 0:
        total = g.grid.integrate(a * r ** alpha)
        return NormValue(float(total) ** (1 / p))
    if alpha <= -1:
        if a[0] != 0:
            return NormValue(math.inf, True)
        total = g.grid.integrate(np.concatenate([[0.0], a[1:] * r[1:] ** alpha]))
        return NormValue(float(total) ** (1 / p))
    h = r[1]
    first = (a[0] * (1 / (alpha + 1) - 1 / (alpha + 2)) + a[1] / (alpha + 2)) * h ** (alpha + 1)
    rest = RadialGrid.from_nodes(r[1:]).integrate(a[1:] * r[1:] ** alpha)
    return NormValue(float(first + rest) ** (1 / p))
