"""Disc-multiplier kernels K_nu, their four-way split, and discrete operators."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import bessel
from .errors import ParameterError, SingularityError
from .grids import RadialGrid, RadialProfile, weighted_lp_norm

DELTA = 1e-3
SPLITS = ("full", "j1", "j2", "j3", "j4")
REGIONS = ("zero", "critical", "infinity", "all")

_GX, _GW = leggauss(8)


@dataclass(frozen=True)
class KernelSpec:
    nu: float
    split: str = "full"
    region: tuple = ("all", "all")

    def __post_init__(self):
        if not (np.isfinite(self.nu) and self.nu >= 0):
            raise ParameterError("kernel order must be finite and nonnegative")
        if self.split not in SPLITS:
            raise ParameterError(f"unknown split {self.split!r}")
        if len(self.region) != 2 or any(a not in REGIONS for a in self.region):
            raise ParameterError(f"bad region {self.region!r}")


@dataclass(frozen=True)
class RegionPartition:
    """The partition I_0, I_c, I_inf of [0, inf) and the Airy-scale bands."""

    nu: float

    @property
    def zero(self):
        return (0.0, self.nu / 2)

    @property
    def critical(self):
        return (self.nu / 2, 2 * self.nu)

    @property
    def infinity(self):
        return (2 * self.nu, math.inf)

    def interval(self, name: str):
        if name == "all":
            return (0.0, math.inf)
        return getattr(self, name)

    def indicator(self, name: str, x):
        a, b = self.interval(name)
        x = np.asarray(x, dtype=float)
        return ((x >= a) & (x < b)).astype(float)

    @property
    def kmax(self) -> int:
        return int(math.floor((2 / 3) * math.log2(self.nu) + 1e-9)) if self.nu > 1 else 0

    def bands(self):
        """Dyadic bands I_0 and I_k^+/- (k = 0..kmax) clipped to I_c."""
        c = self.nu ** (1 / 3)
        lo, hi = self.critical
        out = [("core", max(lo, self.nu - c), min(hi, self.nu + c))]
        for k in range(self.kmax + 1):
            a, b = self.nu + 2 ** k * c, self.nu + 2 ** (k + 1) * c
            if a < hi:
                out.append((f"+{k}", a, min(b, hi)))
            a, b = self.nu - 2 ** (k + 1) * c, self.nu - 2 ** k * c
            if b > lo:
                out.append((f"-{k}", max(a, lo), b))
        return out

    def g_bands(self):
        """Unit-width bands G_tau above and below nu, tau = 0..[nu^(2/3)/2]."""
        c = self.nu ** (1 / 3)
        taus = range(int(math.floor(0.5 * self.nu ** (2 / 3) + 1e-9)) + 1)
        up = [(self.nu + t * c, self.nu + (t + 1) * c) for t in taus]
        down = [(self.nu - (t + 1) * c, self.nu - t * c) for t in taus]
        return up, down


def _bessel_pair(nu, x):
    x = np.asarray(x, dtype=float)
    return bessel.jv(nu, x), bessel.jvp(nu, x)


def _diagonal(nu, t, jt, jpt):
    """K_nu(t, t) = t int_0^1 J_nu(ts)^2 s ds (Lommel's integral)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 0.5 * t * (jpt ** 2 + (1 - nu ** 2 / t ** 2) * jt ** 2)
    return np.where(t > 0, out, 0.0)


def _s_integral(nu, t, r):
    """sqrt(tr) int_0^1 J_nu(rs) J_nu(ts) s ds by panel Gauss quadrature."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    P = int(max(4, math.ceil(2 * float(np.max(t + r)) / math.pi)))
    edges = np.linspace(0, 1, P + 1)
    s = ((edges[:-1, None] + edges[1:, None]) / 2 + (edges[1] - edges[0]) / 2 * _GX[None, :]).ravel()
    w = np.tile(_GW * (edges[1] - edges[0]) / 2, P)
    jr = bessel.jv(nu, r[:, None] * s[None, :])
    jt = bessel.jv(nu, t[:, None] * s[None, :])
    return np.sqrt(t * r) * ((jr * jt * s[None, :]) @ w)


def kernel_k(nu: float, t, r):
    """K_nu(t, r) = sqrt(tr) int_0^1 J_nu(rs) J_nu(ts) s ds.

    Off the band ``|t - r| <= DELTA * max(1, t, r)`` the closed form is used;
    inside it the s-integral is evaluated directly, except exactly on the
    diagonal where Lommel's formula applies.
    """
    t_a = np.asarray(t, dtype=float)
    r_a = np.asarray(r, dtype=float)
    if np.any(t_a <= 0) or np.any(r_a <= 0):
        raise ParameterError("kernel_k needs t, r > 0")
    jt, jpt = _bessel_pair(nu, t_a)
    jr, jpr = _bessel_pair(nu, r_a)
    out = _kernel_from_values(nu, *np.broadcast_arrays(t_a, r_a, jt, jpt, jr, jpr))
    return out if out.ndim else float(out)


def _kernel_from_values(nu, t, r, jt, jpt, jr, jpr):
    t, r, jt, jpt, jr, jpr = (np.asarray(a, dtype=float) for a in (t, r, jt, jpt, jr, jpr))
    near = np.abs(t - r) <= DELTA * np.maximum(1.0, np.maximum(t, r))
    with np.errstate(divide="ignore", invalid="ignore"):
        # the Wronskian identity gives (r^2 - t^2) in the denominator
        out = np.sqrt(t * r) * (t * jpt * jr - r * jpr * jt) / (r * r - t * t)
    diag = t == r
    if diag.any():
        out = np.where(diag, _diagonal(nu, t, jt, jpt), out)
    band = near & ~diag & (t > 0) & (r > 0)
    if band.any():
        out = np.array(out, dtype=float)
        out[band] = _s_integral(nu, t[band], r[band])
    zero = (t == 0) | (r == 0)
    if zero.any():
        out = np.where(zero, 0.0, out)
    return out


def kernel_split(spec: KernelSpec, t, r):
    """One of the four pieces K^j of the kernel, with region indicators."""
    t_a = np.asarray(t, dtype=float)
    r_a = np.asarray(r, dtype=float)
    if np.any(t_a <= 0) or np.any(r_a <= 0):
        raise ParameterError("kernel_split needs t, r > 0")
    part = RegionPartition(spec.nu)
    mask = part.indicator(spec.region[0], t_a) * part.indicator(spec.region[1], r_a)
    if spec.split == "full":
        val = kernel_k(spec.nu, t_a, r_a)
    else:
        if spec.split in ("j1", "j3") and np.any((t_a == r_a) & (mask != 0)):
            raise SingularityError(f"{spec.split} is singular on t = r")
        jt, jpt = _bessel_pair(spec.nu, t_a)
        jr, jpr = _bessel_pair(spec.nu, r_a)
        val = _split_from_values(spec.split, t_a, r_a, jt, jpt, jr, jpr)
    out = np.where(mask != 0, val, 0.0)
    return out if out.ndim else float(out)


def _split_from_values(split, t, r, jt, jpt, jr, jpr):
    # overall sign chosen so that j1 + j2 + j3 + j4 = K_nu
    st, sr = np.sqrt(t), np.sqrt(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        if split == "j1":
            return -st * jpt * jr * sr / (2 * (t - r))
        if split == "j2":
            return -st * jpt * jr * sr / (2 * (t + r))
        if split == "j3":
            return -st * jt * jpr * sr / (2 * (r - t))
        if split == "j4":
            return -st * jt * jpr * sr / (2 * (r + t))
    raise ParameterError(f"unknown split {split!r}")


# ------------------------------------------------------------- operators
@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Quadrature-weighted kernel matrix A[i, j] = K(t_i, r_j) w_j."""

    matrix: np.ndarray
    rows: RadialGrid
    cols: RadialGrid

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.shape != (self.rows.size, self.cols.size):
            raise ParameterError("matrix shape does not match its grids")
        if not np.all(np.isfinite(m)):
            raise ParameterError("operator entries must be finite")

    def __matmul__(self, v):
        return self.matrix @ v


def kernel_matrix(nu: float, t, r, split: str = "full"):
    """Dense K(t_i, r_j) (no weights) for grids that may contain zero."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    jt, jpt = _bessel_pair(nu, t)
    jr, jpr = _bessel_pair(nu, r)
    T, R = np.meshgrid(t, r, indexing="ij")
    JT, JPT = jt[:, None], jpt[:, None]
    JR, JPR = jr[None, :], jpr[None, :]
    if split == "full":
        return _kernel_from_values(nu, T, R, *np.broadcast_arrays(JT, JPT, JR, JPR))
    out = _split_from_values(split, T, R, JT, JPT, JR, JPR)
    return np.where((T == 0) | (R == 0), 0.0, out)


def _origin_row(nu, n, r):
    """Limit t -> 0 of t^(-(n-1)/2) K_nu(t, r) r^((n-1)/2); nonzero only if k = 0."""
    k = nu + 1 - n / 2
    if abs(k) > 1e-12:
        return np.zeros_like(r)
    c = 1 / (2 ** nu * math.gamma(nu + 1))
    out = np.zeros_like(r)
    pos = r > 0
    out[pos] = c * r[pos] ** ((n - 1) / 2) * np.sqrt(r[pos]) * bessel.jv(nu + 1, r[pos]) / r[pos]
    return out


def tkn_matrix(n: int, k: int, in_grid: RadialGrid, out_grid: RadialGrid) -> DiscreteOperator:
    """Discretisation of T_k^n from ``in_grid`` to ``out_grid``."""
    if n < 2 or k < 0:
        raise ParameterError("need n >= 2 and k >= 0")
    nu = k - 1 + n / 2
    t = out_grid.nodes
    r = in_grid.nodes
    K = kernel_matrix(nu, t, r)
    h = (n - 1) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        A = K * (r ** h)[None, :] / np.where(t > 0, t ** h, 1.0)[:, None]
    zero = t == 0
    if zero.any():
        A[zero] = _origin_row(nu, n, r)
    return DiscreteOperator(A * in_grid.weights[None, :], out_grid, in_grid)


def apply_tkn(n: int, k: int, g: RadialProfile, out_grid: RadialGrid | None = None) -> RadialProfile:
    """Apply the per-mode disc operator T_k^n to a radial profile.

    T_k^n g(t) = t^{-(n-1)/2} int_0^inf g(r) r^{(n-1)/2} K_{k-1+n/2}(t, r) dr,
    evaluated by trapezoid quadrature on the grid of ``g``.  The sign
    factor (-1)^k is not applied, so T_k^n is the mode-k part of the
    projection onto frequencies in the unit ball.
    """
    out_grid = g.grid if out_grid is None else out_grid
    if not np.any(g.values):
        return RadialProfile(out_grid, np.zeros(out_grid.size, dtype=complex))
    A = tkn_matrix(n, k, g.grid, out_grid)
    return RadialProfile(out_grid, A.matrix @ g.values)


# ----------------------------------------------------------- norm estimates
@dataclass
class NormEstimate:
    value: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list)

    def __float__(self):
        return float(self.value)


def _pnorm(v, p):
    return float(np.sum(np.abs(v) ** p) ** (1 / p))


def _dual(v, p):
    """Unit vector in the dual norm attaining <v, dual(v)> = ||v||_p."""
    nv = _pnorm(v, p)
    if nv == 0:
        return np.zeros_like(v)
    u = v / nv
    return np.abs(u) ** (p - 1) * np.sign(u)


def _boyd(B, p, x0, maxit, tol):
    q = p / (p - 1)
    x = x0 / _pnorm(x0, p)
    best = 0.0
    prev = 0.0
    hist = []
    converged = False
    it = 0
    for it in range(1, maxit + 1):
        y = B @ x
        est = _pnorm(y, p)
        best = max(best, est)
        hist.append(best)
        if est == 0:
            converged = True
            break
        z = B.T @ _dual(y, p)
        if _pnorm(z, q) <= float(z @ x) * (1 + 1e-14):
            converged = True
            break
        if it > 1 and abs(est - prev) <= tol * est:
            converged = True
            break
        prev = est
        x = _dual(z, q)
    return best, it, converged, hist


def lp_operator_norm(A: DiscreteOperator | np.ndarray, p: float, alpha: float = 0.0,
                     maxit: int = 200, tol: float = 1e-6) -> NormEstimate:
    """Lower bound for the weighted l^p -> l^p norm of a discrete operator.

    Nodes carry the weight ``r**alpha * w`` (quadrature weight ``w``).  A
    bare matrix is treated with unit weights.  Boyd's power iteration is
    started from the constant vector and from the column of largest norm;
    the larger estimate is returned.
    """
    if not (1 < p < math.inf):
        raise ParameterError("p must lie in (1, inf)")
    if isinstance(A, DiscreteOperator):
        M = np.asarray(A.matrix, dtype=float)
        wr = A.rows.weights * np.where(A.rows.nodes > 0, A.rows.nodes, 1.0) ** alpha
        wc = A.cols.weights * np.where(A.cols.nodes > 0, A.cols.nodes, 1.0) ** alpha
        keep_r = (A.rows.nodes > 0) | (alpha >= 0)
        keep_c = (A.cols.nodes > 0) | (alpha >= 0)
        M = M[keep_r][:, keep_c]
        B = (wr[keep_r] ** (1 / p))[:, None] * M / (wc[keep_c] ** (1 / p))[None, :]
    else:
        B = np.asarray(A, dtype=float)
    if not np.any(B):
        return NormEstimate(0.0, 0, True, [0.0])
    starts = [np.ones(B.shape[1])]
    col = np.argmax(np.sum(np.abs(B) ** p, axis=0))
    e = np.zeros(B.shape[1])
    e[col] = 1.0
    starts.append(e)
    best = None
    for x0 in starts:
        res = _boyd(B, p, x0, maxit, tol)
        if best is None or res[0] > best[0]:
            best = res
    return NormEstimate(best[0], best[1], best[2], best[3])


# ---------------------------------------------------------------- scans
def staggered_block(nu: float, split: str, region: tuple, h: float, r_cap: float):
    """Matrix of one region block of K^j on a lattice of spacing ``h``.

    Rows sit at lattice midpoints and columns at lattice nodes, so the
    singular pieces are never evaluated on t = r.  Unbounded intervals are
    cut at ``r_cap``.
    """
    part = RegionPartition(nu)

    def pts(name, offset):
        a, b = part.interval(name)
        b = min(b, r_cap)
        m0 = math.ceil(a / h - offset)
        m1 = math.ceil(b / h - offset)
        x = (np.arange(m0, m1) + offset) * h
        return x[x > 0]

    t = pts(region[0], 0.5)
    r = pts(region[1], 0.0)
    K = kernel_matrix(nu, t, r, split)
    rows = RadialGrid(t, np.full(t.size, h))
    cols = RadialGrid(r, np.full(r.size, h))
    return DiscreteOperator(K * h, rows, cols)


@dataclass
class UniformityRow:
    nu: float
    p: float
    block: str
    alpha: float
    estimate: NormEstimate

    def csv(self):
        e = self.estimate
        return f"{self.nu:.16g},{self.p:.16g},{self.block},{self.alpha:.16g},{e.value:.16e},{e.iterations},{str(e.converged).lower()}"


def scan_spacing(nu: float, nodes_per_wavelength: int = 20, nodes_per_band: int = 16) -> float:
    return min(2 * math.pi / nodes_per_wavelength, nu ** (1 / 3) / nodes_per_band)


def kj_uniformity_scan(p: float, nu_list: Sequence[float],
                       blocks=(("critical", "critical"), ("critical", "infinity"), ("infinity", "critical")),
                       split: str = "j1", cap_factor: float = 4.0, maxit: int = 200,
                       nodes_per_wavelength: int = 20, nodes_per_band: int = 16) -> list:
    """L^p(dr) norm estimates of region blocks of K^j for each order.

    I_inf is truncated at ``cap_factor * nu``.
    """
    if not (1 < p < math.inf):
        raise ParameterError("p must lie in (1, inf)")
    rows = []
    for nu in nu_list:
        h = scan_spacing(nu, nodes_per_wavelength, nodes_per_band)
        for region in blocks:
            op = staggered_block(nu, split, region, h, cap_factor * nu)
            est = lp_operator_norm(op.matrix, p, maxit=maxit)
            rows.append(UniformityRow(float(nu), p, _block_name(region), 0.0, est))
    return rows


def _block_name(region):
    short = {"zero": "0", "critical": "c", "infinity": "inf", "all": "all"}
    return f"({short[region[0]]},{short[region[1]]})"


def uniformity_csv(rows) -> str:
    return "nu,p,block,alpha,norm_estimate,iterations,converged\n" + "".join(r.csv() + "\n" for r in rows)


@dataclass
class WeightedMixedResult:
    ratio: float | None
    lhs: float
    rhs: float
    alpha: float
    empty: bool = False


def weighted_mixed_test(p: float, n: int, nu_list: Sequence[float], profiles: Sequence[RadialProfile],
                        out_grid: RadialGrid | None = None) -> WeightedMixedResult:
    """LHS/RHS of the vector-valued inequality for K_nu with weight r^alpha.

    ``alpha = (n-1)(1-p/2)``; each profile ``g_l`` is paired with order
    ``nu_list[l]``.  Only claimed for ``2n/(n+1) < p < 2n/(n-1)``.
    """
    lo, hi = 2 * n / (n + 1), (2 * n / (n - 1) if n > 1 else math.inf)
    if not (lo < p < hi):
        raise ParameterError(f"p={p} outside ({lo:g}, {hi:g})")
    if len(nu_list) != len(profiles) or not profiles:
        raise ParameterError("need one order per profile")
    alpha = (n - 1) * (1 - p / 2)
    grid = profiles[0].grid
    out_grid = grid if out_grid is None else out_grid
    sq_in = np.zeros(grid.size)
    sq_out = np.zeros(out_grid.size)
    for nu, g in zip(nu_list, profiles):
        if g.grid.size != grid.size or not np.array_equal(g.grid.nodes, grid.nodes):
            raise ParameterError("profiles must share a grid")
        sq_in += np.abs(g.values) ** 2
        if np.any(g.values):
            K = kernel_matrix(nu, out_grid.nodes, grid.nodes) * grid.weights[None, :]
            sq_out += np.abs(K @ g.values) ** 2
    rhs = weighted_lp_norm(RadialProfile(grid, np.sqrt(sq_in)), p, alpha).value
    lhs = weighted_lp_norm(RadialProfile(out_grid, np.sqrt(sq_out)), p, alpha).value
    if rhs == 0:
        return WeightedMixedResult(None, lhs, rhs, alpha, empty=True)
    return WeightedMixedResult(lhs / rhs, lhs, rhs, alpha)
