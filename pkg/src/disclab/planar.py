"""Periodic planar grids and Fourier multipliers.

Samples of a :class:`GridField2D` sit at ``(i L/N - L/2, j L/N - L/2)``.
Frequencies are angular, ``2 pi m / L``; ``disc(R)`` keeps ``|xi| <= R`` so
``disc(1)`` matches the radial kernels of :mod:`disclab.kernels`.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import FitError, ParameterError
from .grids import ModeFunction, RadialGrid, RadialProfile

KINDS = ("disc", "ball_shifted", "half_plane", "directional_hilbert", "homogeneous")


@dataclass(frozen=True, eq=False)
class GridField2D:
    N: int
    L: float
    values: np.ndarray

    def __post_init__(self):
        N = int(self.N)
        if N < 32 or N & (N - 1):
            raise ParameterError("N must be a power of two >= 32")
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (N, N) or not np.all(np.isfinite(v)):
            raise ParameterError("values must be a finite N x N array")
        object.__setattr__(self, "values", v)

    @property
    def h(self) -> float:
        return self.L / self.N

    @staticmethod
    def axis(N: int, L: float) -> np.ndarray:
        return np.arange(N) * (L / N) - L / 2

    def coords(self):
        x = self.axis(self.N, self.L)
        return np.meshgrid(x, x, indexing="ij")

    @classmethod
    def from_function(cls, N: int, L: float, func) -> "GridField2D":
        x = cls.axis(N, L)
        X, Y = np.meshgrid(x, x, indexing="ij")
        return cls(N, L, func(X, Y))

    @classmethod
    def zeros(cls, N: int, L: float) -> "GridField2D":
        return cls(N, L, np.zeros((N, N), dtype=complex))

    def l2(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)) * self.h)

    def with_values(self, v) -> "GridField2D":
        return GridField2D(self.N, self.L, v)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("i,j,re,im\n")
        for (i, j), v in np.ndenumerate(self.values):
            buf.write(f"{i},{j},{v.real:.16e},{v.imag:.16e}\n")
        return buf.getvalue()


def frequencies(N: int, L: float) -> np.ndarray:
    return 2 * np.pi * np.fft.fftfreq(N, d=L / N)


def _unit(w):
    w = np.asarray(w, dtype=float)
    n = np.linalg.norm(w)
    if abs(n - 1) > 1e-12:
        raise ParameterError("direction must be a unit vector")
    return w


def _step(d, tol):
    """1 where d < 0, 1/2 where d == 0 (to tolerance), 0 elsewhere."""
    return np.where(d < -tol, 1.0, np.where(d <= tol, 0.5, 0.0))


@dataclass(frozen=True)
class MultiplierSymbol:
    """Symbol of a planar Fourier multiplier.

    Indicator symbols take the value 1/2 on their discontinuity set.  The
    Hilbert symbol i sign(xi . omega) takes the mean of its one-sided
    limits there, i.e. 0.
    """

    kind: str
    R: float = 1.0
    center: tuple = (0.0, 0.0)
    omega: tuple = (1.0, 0.0)
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown symbol kind {self.kind!r}")
        if not self.R > 0:
            raise ParameterError("R must be positive")
        if self.kind in ("half_plane", "directional_hilbert"):
            _unit(self.omega)
        if self.kind == "homogeneous" and abs(self.coeffs.get(0, 0)) > 0:
            raise ParameterError("Omega must have zero mean")

    @classmethod
    def disc(cls, R=1.0):
        return cls("disc", R=R)

    @classmethod
    def ball_shifted(cls, R, center):
        return cls("ball_shifted", R=R, center=tuple(map(float, center)))

    @classmethod
    def half_plane(cls, omega):
        return cls("half_plane", omega=tuple(map(float, omega)))

    @classmethod
    def directional_hilbert(cls, omega):
        return cls("directional_hilbert", omega=tuple(map(float, omega)))

    @classmethod
    def homogeneous(cls, coeffs):
        return cls("homogeneous", coeffs=dict(coeffs))

    @property
    def compact(self) -> bool:
        return self.kind in ("disc", "ball_shifted")

    def __call__(self, kx, ky):
        kx = np.asarray(kx, dtype=float)
        ky = np.asarray(ky, dtype=float)
        if self.kind in ("disc", "ball_shifted"):
            cx, cy = self.center if self.kind == "ball_shifted" else (0.0, 0.0)
            rho = np.hypot(kx - cx, ky - cy)
            return _step(rho - self.R, 1e-12 * self.R)
        ox, oy = self.omega
        d = kx * ox + ky * oy
        scale = 1e-12 * max(1.0, float(np.max(np.abs(d), initial=0.0)))
        if self.kind == "half_plane":
            return _step(d, scale)
        if self.kind == "directional_hilbert":
            return 1j * np.where(np.abs(d) <= scale, 0.0, np.sign(d))
        # homogeneous: e^{im theta} -> (-i)^|m| / |m| e^{im phi}
        phi = np.arctan2(ky, kx)
        out = np.zeros(np.broadcast(kx, ky).shape, dtype=complex)
        for m, c in self.coeffs.items():
            if m == 0 or c == 0:
                continue
            out += c * (-1j) ** abs(m) / abs(m) * np.exp(1j * m * phi)
        return np.where((kx == 0) & (ky == 0), 0.0, out)


def _apply_fft(sym, values, L):
    N = values.shape[0]
    k = frequencies(N, L)
    KX, KY = np.meshgrid(k, k, indexing="ij")
    F = np.fft.fft2(np.fft.ifftshift(values))
    return np.fft.fftshift(np.fft.ifft2(F * sym(KX, KY)))


def _apply_matrix_dft(sym, values, L, pad):
    """Zero-padded transform restricted to the symbol's compact support.

    Identical to embedding the field in a ``pad`` times larger periodic box
    and using FFTs, but only the lattice frequencies inside the support are
    formed, through separable DFT matrices.
    """
    N = values.shape[0]
    h = L / N
    dk = 2 * np.pi / (pad * L)
    cx, cy = sym.center if sym.kind == "ball_shifted" else (0.0, 0.0)
    nyq = np.pi / h

    def lattice(c):
        lo = max(math.ceil((c - sym.R) / dk - 1e-9), -math.floor(nyq / dk))
        hi = min(math.floor((c + sym.R) / dk + 1e-9), math.floor(nyq / dk))
        return np.arange(lo, hi + 1) * dk

    kx, ky = lattice(cx), lattice(cy)
    x = GridField2D.axis(N, L)
    Ex = np.exp(-1j * np.outer(kx, x))
    Ey = np.exp(-1j * np.outer(ky, x))
    Fh = Ex @ values @ Ey.T
    S = sym(kx[:, None], ky[None, :])
    G = Fh * S * (dk / (2 * np.pi)) ** 2 * h * h
    return Ex.conj().T @ G @ Ey.conj()


def _axis_of(sym):
    if sym.kind not in ("half_plane", "directional_hilbert"):
        return None
    ox, oy = sym.omega
    if oy == 0:
        return 0
    if ox == 0:
        return 1
    return None


def _apply_axis(sym, values, L, pad, axis):
    # symbol depends on one frequency coordinate only: 1-d padded transforms
    N = values.shape[0]
    M = N * pad
    o = (M - N) // 2
    shape = [N, N]
    shape[axis] = M
    big = np.zeros(shape, dtype=complex)
    sl = [slice(None), slice(None)]
    sl[axis] = slice(o, o + N)
    big[tuple(sl)] = values
    k = frequencies(M, L * pad)
    s = sym(k, 0 * k) if axis == 0 else sym(0 * k, k)
    s = s.reshape((-1, 1) if axis == 0 else (1, -1))
    F = np.fft.fft(np.fft.ifftshift(big, axes=axis), axis=axis)
    out = np.fft.fftshift(np.fft.ifft(F * s, axis=axis), axes=axis)
    return out[tuple(sl)]


def apply_multiplier(sym: MultiplierSymbol, f: GridField2D, pad: int = 1) -> GridField2D:
    """Apply a multiplier at angular frequencies 2 pi m / (pad L).

    ``pad > 1`` zero-pads the field to a ``pad`` times larger box before
    transforming (aperiodic approximation); compact symbols use the
    restricted DFT path.
    """
    pad = int(pad)
    if pad < 1:
        raise ParameterError("pad must be >= 1")
    if pad == 1:
        return f.with_values(_apply_fft(sym, f.values, f.L))
    if sym.compact:
        return f.with_values(_apply_matrix_dft(sym, f.values, f.L, pad))
    axis = _axis_of(sym)
    if axis is not None:
        return f.with_values(_apply_axis(sym, f.values, f.L, pad, axis))
    N = f.N
    M = N * pad
    big = np.zeros((M, M), dtype=complex)
    o = (M - N) // 2
    big[o:o + N, o:o + N] = f.values
    out = _apply_fft(sym, big, f.L * pad)
    return f.with_values(out[o:o + N, o:o + N])


def modulate(f: GridField2D, xi) -> GridField2D:
    X, Y = f.coords()
    return f.with_values(f.values * np.exp(1j * (xi[0] * X + xi[1] * Y)))


# ------------------------------------------------------------- mixed norms
def _bilinear(values, L, px, py):
    N = values.shape[0]
    h = L / N
    u = (px + L / 2) / h
    v = (py + L / 2) / h
    i0 = np.clip(np.floor(u).astype(int), 0, N - 2)
    j0 = np.clip(np.floor(v).astype(int), 0, N - 2)
    a = u - i0
    b = v - j0
    return ((1 - a) * (1 - b) * values[i0, j0] + a * (1 - b) * values[i0 + 1, j0]
            + (1 - a) * b * values[i0, j0 + 1] + a * b * values[i0 + 1, j0 + 1])


def polar_samples(f: GridField2D, n_r: int | None = None, n_theta: int | None = None, r_max=None):
    """Bilinear resampling onto a polar grid (defaults n_r = N/2, n_theta = 4N)."""
    n_r = f.N // 2 if n_r is None else n_r
    n_theta = 4 * f.N if n_theta is None else n_theta
    r_max = f.L / 2 - f.h if r_max is None else r_max
    r = np.linspace(0, r_max, n_r + 1)
    th = np.arange(n_theta) * (2 * np.pi / n_theta)
    px = r[:, None] * np.cos(th)[None, :]
    py = r[:, None] * np.sin(th)[None, :]
    return r, th, _bilinear(f.values, f.L, px, py)


def angular_l2(f: GridField2D, n_r=None, n_theta=None, r_max=None):
    """Radii and (int |f(r, theta)|^2 dtheta)^(1/2)."""
    r, th, vals = polar_samples(f, n_r, n_theta, r_max)
    ang = np.sqrt(np.mean(np.abs(vals) ** 2, axis=1) * 2 * np.pi)
    return r, ang


def mixed_norm_grid(f: GridField2D | Sequence[GridField2D], p: float, n_r=None, n_theta=None) -> float:
    """L^p(r dr) L^2(dtheta) norm of a field, or of (sum_j |f_j|^2)^(1/2)."""
    if p < 1:
        raise ParameterError("p must be >= 1")
    fields = [f] if isinstance(f, GridField2D) else list(f)
    if not fields:
        raise ParameterError("no fields")
    sq = sum(np.abs(g.values) ** 2 for g in fields)
    g0 = fields[0]
    r, a = angular_l2(g0.with_values(np.sqrt(sq)), n_r, n_theta)
    return float(np.trapezoid(a ** p * r, r) ** (1 / p))


def radial_mode_profile(grid: RadialGrid, f_rad) -> ModeFunction:
    """Mode function of a radial planar function (coefficient on Y_0 = (2 pi)^(-1/2))."""
    prof = RadialProfile.from_function(grid, lambda r: np.sqrt(2 * np.pi) * f_rad(r))
    return ModeFunction.single(prof, 2)


def aliasing_indicator(f: GridField2D) -> float:
    """Fraction of spectral energy in the outer half of the frequency square."""
    F = np.abs(np.fft.fft2(f.values)) ** 2
    k = np.abs(np.fft.fftfreq(f.N))
    outer = (k[:, None] > 0.25) | (k[None, :] > 0.25)
    tot = F.sum()
    return float(F[outer].sum() / tot) if tot > 0 else 0.0


# ------------------------------------------------------------ experiments
@dataclass
class SlopeFit:
    slope: float | None
    intercept: float | None
    rejected: bool = False
    radii: np.ndarray | None = None
    means: np.ndarray | None = None


def _loglog_fit(x, y):
    A = np.vstack([np.log(x), np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
    return float(coef[0]), float(coef[1])


def cube_field(N: int, L: float) -> GridField2D:
    """Indicator of the unit square centred at the origin (cell-area weights at edges)."""
    x = GridField2D.axis(N, L)
    h = L / N

    def cover(c):
        # fraction of the cell [c - h/2, c + h/2] inside [-1/2, 1/2]
        return np.clip((np.minimum(c + h / 2, 0.5) - np.maximum(c - h / 2, -0.5)) / h, 0, 1)

    w = cover(x)
    return GridField2D(N, L, np.outer(w, w))


def cube_decay_experiment(p: float = 2.0, r_range=(4.0, 12.0), N: int = 2048, L: float = 64.0,
                          field_in: GridField2D | None = None, n_fit: int = 64, pad: int = 16):
    """Slope of log A(r) against log r for A(r) the angular L^2 mean of H_{e2} chi_Q."""
    lo, hi = r_range
    if lo < 2 or hi > L / 4:
        raise ParameterError("r_range must lie inside [2, L/4]")
    f = cube_field(N, L) if field_in is None else field_in
    Hf = apply_multiplier(MultiplierSymbol.directional_hilbert((0.0, 1.0)), f, pad)
    r, a = angular_l2(Hf, n_r=N // 2)
    sel = (r >= lo) & (r <= hi)
    if not np.any(a[sel] > 0) or np.max(a[sel]) < 1e-14:
        return SlopeFit(None, None, rejected=True)
    rs = np.geomspace(lo, hi, n_fit)
    As = np.interp(rs, r, a)
    slope, icpt = _loglog_fit(rs, As)
    return SlopeFit(slope, icpt, radii=r, means=a)


def partial_mixed_integrals(r, a, p, r0=2.0, radii=(4.0, 8.0, 16.0)):
    """int_{r0}^R A(r)^p r dr for each R."""
    out = []
    for R in radii:
        m = (r >= r0) & (r <= R)
        out.append(float(np.trapezoid(a[m] ** p * r[m], r[m])))
    return out


@dataclass
class ThresholdCheck:
    p: float
    radii: list
    integrals: list
    increment_ratio: float
    integral_tail: float
    norm_tail: float

    @property
    def diverges(self) -> bool:
        return self.increment_ratio >= 0.75

    def converges(self, tol: float = 0.05) -> bool:
        return self.increment_ratio <= 0.6 and self.norm_tail < tol


def threshold_check(r, a, p, r0=2.0) -> ThresholdCheck:
    """Dyadic partial integrals over [r0, R], R = 2 r0, 4 r0, ..., up to the last radius.

    ``increment_ratio`` compares the last two dyadic increments: near 1 for a
    logarithmic divergence, near 2^(1 - p s - ...) < 1 for a convergent tail.
    ``norm_tail`` is the relative change of the partial mixed norm
    (integral^(1/p)) across the last dyadic step.
    """
    radii = [r0 * 2 ** j for j in range(1, 32) if r0 * 2 ** j < r[-1]] + [float(r[-1])]
    if len(radii) < 3:
        raise ParameterError("need at least three dyadic radii")
    I = partial_mixed_integrals(r, a, p, r0, radii)
    d = np.diff([0.0] + I)
    # last step may be shorter than dyadic; rescale by its log-length
    span = math.log(radii[-1] / radii[-2]) / math.log(2)
    inc = d[-1] / span if span < 1 else d[-1]
    ratio = float(inc / d[-2]) if d[-2] > 0 else math.inf
    return ThresholdCheck(p, radii, I, ratio, (I[-1] - I[-2]) / I[-1],
                          (I[-1] / I[-2]) ** (1 / p) - 1)


@dataclass
class LimitResult:
    errors: list
    floor: float
    excess: list

    def nonincreasing(self, atol: float = 1e-6) -> bool:
        return bool(np.all(np.diff(self.excess) <= atol))


def _null_line(f: GridField2D, omega, pad: int) -> GridField2D:
    # part of f on {xi . omega = 0, xi != 0}, weighted by 1/2
    def sym(kx, ky):
        d = kx * omega[0] + ky * omega[1]
        tol = 1e-12 * max(1.0, float(np.max(np.abs(d))))
        return np.where((np.abs(d) <= tol) & ((kx != 0) | (ky != 0)), 0.5, 0.0)

    N, M = f.N, f.N * pad
    big = np.zeros((M, M), dtype=complex)
    o = (M - N) // 2
    big[o:o + N, o:o + N] = f.values
    return f.with_values(_apply_fft(sym, big, f.L * pad)[o:o + N, o:o + N])


def ball_to_halfplane_limit(f: GridField2D, k_max: int = 6, omega=(1.0, 0.0), p: float = 2.0,
                            pad: int = 1) -> LimitResult:
    """Distances between shifted-ball outputs and the half-plane output.

    Ball k has radius R_k = 2^k and centre -R_k omega.  On the lattice the
    balls and the half-plane keep disagreeing on the null line
    ``xi . omega = 0`` (1/2 against 0), so the distances settle at the
    mixed norm of that line component, returned as ``floor``.  ``excess``
    is sqrt(err^2 - floor^2), meaningful for p = 2.
    """
    omega = tuple(_unit(omega))
    target = apply_multiplier(MultiplierSymbol.half_plane(omega), f, pad)
    errs = []
    for k in range(1, k_max + 1):
        R = 2.0 ** k
        sym = MultiplierSymbol.ball_shifted(R, (-R * omega[0], -R * omega[1]))
        out = apply_multiplier(sym, f, pad)
        errs.append(mixed_norm_grid(out.with_values(out.values - target.values), p))
    floor = mixed_norm_grid(_null_line(f, omega, pad), p)
    e = np.asarray(errs)
    excess = np.sqrt(np.maximum(e ** 2 - floor ** 2, 0.0))
    return LimitResult(errs, floor, excess.tolist())


@dataclass
class RatioResult:
    ratio: float | None
    empty: bool = False
    detail: dict = field(default_factory=dict)


def meyer_vector_test(dirs, batch: Sequence[GridField2D], p: float) -> RatioResult:
    """||(sum |H_j f_j|^2)^(1/2)|| / ||(sum |f_j|^2)^(1/2)|| in the mixed norm."""
    if len(batch) == 0 or len(dirs) != len(batch):
        raise ParameterError("need one direction per field and a nonempty batch")
    outs = [apply_multiplier(MultiplierSymbol.directional_hilbert(tuple(w)), f) for w, f in zip(dirs, batch)]
    den = mixed_norm_grid(batch, p)
    if den == 0:
        return RatioResult(None, empty=True)
    return RatioResult(mixed_norm_grid(outs, p) / den)


def singular_integral_test(coeffs: dict, p: float, trials: Sequence[GridField2D]) -> RatioResult:
    """Largest mixed-norm ratio ||T f|| / ||f|| of the homogeneous operator over trials."""
    if abs(coeffs.get(0, 0)) > 0:
        raise ParameterError("Omega must have zero mean")
    if not (1 < p < math.inf):
        raise ParameterError("p must lie in (1, inf)")
    sym = MultiplierSymbol.homogeneous(coeffs)
    ratios = []
    for f in trials:
        den = mixed_norm_grid(f, p)
        if den == 0:
            continue
        ratios.append(mixed_norm_grid(apply_multiplier(sym, f), p) / den)
    if not ratios:
        return RatioResult(None, empty=True)
    return RatioResult(max(ratios), detail={"ratios": ratios})
