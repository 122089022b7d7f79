"""Extension of spherical harmonics and the dyadic block exponents of the restriction estimate.

For ``f = sum_k a_k Y_k`` on the sphere, the Fourier transform of ``f dsigma``
has angular L^2 magnitude

    G(r) = 2 pi r^(1 - n/2) (sum_k |a_k|^2 J_{k-1+n/2}(2 pi r)^2)^(1/2)

at radius ``r``.  The block integrals use the rescaled variable ``2 pi r -> r``
and split the degrees into ``k < M/2``, ``M/2 <= k <= 4M`` and ``k > 4M``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .bessel import bessel_sequence, jv, log_bessel_decay
from .errors import FitError, ParameterError
from .grids import RadialGrid, RadialProfile

BLOCKS = ("I1", "I2", "I3")


@dataclass(frozen=True)
class HarmonicCoefficients:
    """Coefficients ``a_k`` of one normalized harmonic per degree."""

    a: Mapping[int, complex]
    n: int = 2

    def __post_init__(self):
        if self.n < 2:
            raise ParameterError("dimension must be at least 2")
        clean = {}
        for k, v in dict(self.a).items():
            if int(k) != k or k < 0:
                raise ParameterError("degrees must be nonnegative integers")
            if not np.isfinite(v):
                raise ParameterError("coefficients must be finite")
            if v != 0:
                clean[int(k)] = complex(v)
        object.__setattr__(self, "a", clean)

    @classmethod
    def flat(cls, k_max: int, n: int = 2) -> "HarmonicCoefficients":
        return cls({k: 1.0 for k in range(k_max + 1)}, n)

    @classmethod
    def single(cls, k: int, n: int = 2, value: complex = 1.0) -> "HarmonicCoefficients":
        return cls({k: value}, n)

    @property
    def k_max(self) -> int:
        return max(self.a, default=0)

    def weights(self) -> np.ndarray:
        """|a_k|^2 for k = 0..k_max."""
        w = np.zeros(self.k_max + 1)
        for k, v in self.a.items():
            w[k] = abs(v) ** 2
        return w

    def mass(self, lo: int = 0, hi: int | None = None) -> float:
        return float(sum(abs(v) ** 2 for k, v in self.a.items() if k >= lo and (hi is None or k <= hi)))


def _mode_sum(c: HarmonicCoefficients, x: np.ndarray) -> np.ndarray:
    """sum_k |a_k|^2 J_{k-1+n/2}(x)^2 at x > 0."""
    w = c.weights()
    if not c.a:
        return np.zeros_like(x)
    nu0 = c.n / 2 - 1
    if len(c.a) <= 4:
        out = np.zeros_like(x)
        for k in c.a:
            out += w[k] * jv(nu0 + k, x) ** 2
        return out
    seq = bessel_sequence(nu0, c.k_max, x)
    return w @ seq ** 2


def extension_magnitude(a: HarmonicCoefficients, r) -> np.ndarray:
    """G(r) as a plain array for any positive radii."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ParameterError("radii must be positive")
    flat = np.atleast_1d(r).ravel()
    G = 2 * np.pi * flat ** (1 - a.n / 2) * np.sqrt(_mode_sum(a, 2 * np.pi * flat))
    return G.reshape(r.shape)


def extension_profile(a: HarmonicCoefficients, r) -> RadialProfile:
    """Angular L^2 magnitude of the extension of ``sum a_k Y_k`` on an increasing radial grid."""
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size < 2:
        raise ParameterError("radii must be a 1-d grid with at least two nodes")
    return RadialProfile(RadialGrid.from_nodes(r), extension_magnitude(a, r))


def _gauss_nodes(lo: float, hi: float, per_unit: float, order: int = 8):
    panels = max(1, int(math.ceil((hi - lo) * per_unit / order)))
    x, w = leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = np.diff(edges)[:, None] / 2
    mid = (edges[:-1] + edges[1:])[:, None] / 2
    return (mid + half * x).ravel(), (half * w).ravel()


@dataclass
class ExtensionNorm:
    value: float
    diverges: bool
    tail_slope: float
    r_min: float
    r_max: float


def _tail_slope(r, integrand, w, period: float = 1.0, min_periods: int = 5) -> float:
    """Log-log slope of the bin-averaged integrand over the last decade of r."""
    lo = r[-1] / 10
    edges = [lo]
    while edges[-1] < r[-1]:
        edges.append(max(edges[-1] * 1.12, edges[-1] + min_periods * period))
    edges = np.array(edges)
    edges[-1] = r[-1]
    mids, means = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        m = (r >= a) & (r < b)
        if m.sum() < 2:
            continue
        mids.append(math.sqrt(a * b))
        means.append(float(np.sum(integrand[m] * w[m]) / np.sum(w[m])))
    means = np.array(means)
    if len(means) < 3 or np.any(means <= 0):
        return -np.inf
    return float(np.polyfit(np.log(mids), np.log(means), 1)[0])


def extension_mixed_norm(a: HarmonicCoefficients, q: float, r_max: float, r_min: float = 0.0,
                         nodes_per_unit: float = 32.0) -> ExtensionNorm:
    """(int_{r_min}^{r_max} G(r)^q r^(n-1) dr)^(1/q) with a divergence flag.

    The flag is raised when the tail integrand, averaged over bins of at
    least five oscillation periods, decays no faster than ``r^(-1-0.01)``
    over the last decade ``[r_max/10, r_max]``.
    """
    if q < 2:
        raise ParameterError("q must be at least 2")
    if not 0 <= r_min < r_max:
        raise ParameterError("need 0 <= r_min < r_max")
    r, w = _gauss_nodes(r_min, r_max, nodes_per_unit)
    G = extension_magnitude(a, r)
    integrand = G ** q * r ** (a.n - 1)
    value = float(np.sum(integrand * w)) ** (1 / q)
    slope = _tail_slope(r, integrand, w) if r_min < r_max / 10 else float("nan")
    return ExtensionNorm(value, bool(slope >= -1 - 1e-2), slope, r_min, r_max)


# ---------------------------------------------------------------- dyadic blocks


def block_ranges(M: int, k_max: int):
    """Degree ranges (inclusive) of the three blocks at scale M, clipped to [0, k_max]."""
    lo2 = int(math.ceil(M / 2))
    hi2 = 4 * M
    return {
        "I1": (0, min(lo2 - 1, k_max)),
        "I2": (lo2, min(hi2, k_max)),
        "I3": (hi2 + 1, k_max),
    }


def _log_block_sums(c: HarmonicCoefficients, M: int, r: np.ndarray) -> dict:
    """log of sum_{k in block} |a_k|^2 J_{k-1+n/2}(r)^2 for each block at r in [M, 2M]."""
    w = c.weights()
    nu0 = c.n / 2 - 1
    kmax = c.k_max
    ranges = block_ranges(M, kmax)
    out = {}
    hi_direct = min(4 * M, kmax)
    seq = bessel_sequence(nu0, hi_direct, r) if c.a else np.zeros((1, r.size))
    with np.errstate(divide="ignore"):
        for name in ("I1", "I2"):
            lo, hi = ranges[name]
            if hi < lo:
                out[name] = np.full(r.size, -np.inf)
                continue
            out[name] = np.log(w[lo:hi + 1] @ seq[lo:hi + 1] ** 2)
        lo, hi = ranges["I3"]
        idx = np.nonzero(w[lo:hi + 1])[0] + lo if hi >= lo else np.array([], dtype=int)
        if idx.size == 0:
            out["I3"] = np.full(r.size, -np.inf)
        else:
            logJ = log_bessel_decay(nu0, int(idx[0]), int(idx[-1]), r)
            terms = np.log(w[idx])[:, None] + 2 * logJ[idx - idx[0]]
            top = terms.max(axis=0)
            out["I3"] = top + np.log(np.sum(np.exp(terms - top), axis=0))
    return out


def _logsumexp(v: np.ndarray) -> float:
    top = float(np.max(v))
    if not np.isfinite(top):
        return -np.inf
    return top + math.log(float(np.sum(np.exp(v - top))))


@dataclass
class BlockValues:
    M: int
    log_blocks: dict
    log_total: float
    log_mass: dict

    def value(self, name: str) -> float:
        if name == "total":
            return math.exp(self.log_total)
        return math.exp(self.log_blocks[name])

    def log_normalized(self, name: str, q: float) -> float:
        return self.log_blocks[name] - q / 2 * self.log_mass[name]


def block_values(c: HarmonicCoefficients, q: float, M: int, nodes_per_unit: float = 8.0) -> BlockValues:
    """Block integrals int_M^{2M} S_block(r)^(q/2) r^((1-n/2)q+n-1) dr in log form."""
    r, w = _gauss_nodes(M, 2 * M, nodes_per_unit)
    logs = _log_block_sums(c, M, r)
    base = np.log(w) + ((1 - c.n / 2) * q + c.n - 1) * np.log(r)
    lb = {k: _logsumexp(q / 2 * v + base) for k, v in logs.items()}
    stack = np.vstack([logs[k] for k in BLOCKS])
    top = stack.max(axis=0)
    log_s = top + np.log(np.sum(np.exp(stack - top), axis=0))
    ranges = block_ranges(M, c.k_max)
    mass = {k: (math.log(c.mass(lo, hi)) if hi >= lo and c.mass(lo, hi) > 0 else -np.inf)
            for k, (lo, hi) in ranges.items()}
    return BlockValues(M, lb, _logsumexp(q / 2 * log_s + base), mass)


@dataclass
class SlopeEstimate:
    slope: float
    stderr: float
    interval: tuple

    def to_dict(self):
        return {"slope": self.slope, "stderr": self.stderr, "interval": list(self.interval)}


def fit_log_slope(Ms, log_values) -> SlopeEstimate:
    """Least-squares slope of log value against log M with a +-2 standard error interval."""
    x = np.log(np.asarray(Ms, dtype=float))
    y = np.asarray(log_values, dtype=float)
    if x.size < 3:
        raise FitError("need at least three M values")
    if not np.all(np.isfinite(y)):
        return SlopeEstimate(float("-inf"), float("nan"), (float("-inf"), float("-inf")))
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    se = math.sqrt(float(resid @ resid) / (x.size - 2) / float(((x - x.mean()) ** 2).sum()))
    return SlopeEstimate(float(slope), se, (float(slope - 2 * se), float(slope + 2 * se)))


def predicted_slopes(q: float) -> dict:
    return {"I1": (4 - q) / 2, "I2": (4 - q) / 3, "I3": 2 - q}


@dataclass
class DyadicBlockReport:
    n: int
    q: float
    Ms: list
    k_max: int
    values: list
    slopes: dict = field(default_factory=dict)
    raw_slopes: dict = field(default_factory=dict)
    single_mode: SlopeEstimate | None = None

    def to_csv(self) -> str:
        lines = ["n,q,M,block,value"]
        for bv in self.values:
            for name in BLOCKS:
                lines.append(f"{self.n},{self.q:g},{bv.M},{name},{bv.value(name):.12e}")
            lines.append(f"{self.n},{self.q:g},{bv.M},total,{bv.value('total'):.12e}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "n": self.n, "q": self.q, "M": self.Ms, "k_max": self.k_max,
            "predicted": predicted_slopes(self.q),
            "normalized_slopes": {k: v.to_dict() for k, v in self.slopes.items()},
            "raw_slopes": {k: v.to_dict() for k, v in self.raw_slopes.items()},
            "single_mode_I2": None if self.single_mode is None else self.single_mode.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)


def single_mode_scan(q: float, Ms: Sequence[int], nodes_per_unit: float = 8.0) -> SlopeEstimate:
    """Slope of int_M^{2M} |J_M(r)|^q r dr, the transition-region envelope of one mode."""
    logs = [block_values(HarmonicCoefficients.single(M), q, M, nodes_per_unit).log_blocks["I2"] for M in Ms]
    return fit_log_slope(Ms, logs)


def dyadic_block_scan(q: float = 6.0, Ms: Sequence[int] = (32, 64, 128, 256), k_max: int | None = None,
                      a: HarmonicCoefficients | None = None, nodes_per_unit: float = 8.0,
                      single_mode: bool = True) -> DyadicBlockReport:
    """Block integrals at n = 2 with fitted exponents.

    ``slopes`` fit each block divided by its own coefficient mass to the
    power q/2, the normalization carried by the block bounds; ``raw_slopes``
    fit the unnormalized values.  Flat coefficients up to ``8 max(M)`` are
    the default.
    """
    Ms = [int(m) for m in Ms]
    if len(Ms) < 3:
        raise FitError("need at least three M values")
    if q <= 4:
        raise ParameterError("q must exceed 4")
    if a is None:
        a = HarmonicCoefficients.flat(k_max if k_max is not None else 8 * max(Ms))
    if a.n != 2:
        raise ParameterError("dyadic_block_scan is two-dimensional")
    vals = [block_values(a, q, M, nodes_per_unit) for M in Ms]
    rep = DyadicBlockReport(2, q, Ms, a.k_max, vals)
    for name in BLOCKS:
        rep.slopes[name] = fit_log_slope(Ms, [v.log_normalized(name, q) for v in vals])
        rep.raw_slopes[name] = fit_log_slope(Ms, [v.log_blocks[name] for v in vals])
    rep.raw_slopes["total"] = fit_log_slope(Ms, [v.log_total for v in vals])
    if single_mode:
        rep.single_mode = single_mode_scan(q, Ms, nodes_per_unit)
    return rep


@dataclass
class GeneralBlockResult:
    n: int
    q: float
    Ms: list
    log_totals: list
    fit: SlopeEstimate
    predicted: float


def general_dimension_block(n: int, q: float, Ms: Sequence[int], a: HarmonicCoefficients | None = None,
                            nodes_per_unit: float = 8.0) -> GeneralBlockResult:
    """Total block value over [M, 2M] with the r^((1-n/2)q+n-1) weight and its fitted slope.

    The default coefficients are ``a_0 = 1``.  The predicted exponent is
    ``(n-2)(1-q/2) + max((4-q)/2, (4-q)/3, 2-q)``.
    """
    if n < 2 or q <= 2:
        raise ParameterError("need n >= 2 and q > 2")
    a = HarmonicCoefficients({0: 1.0}, n) if a is None else a
    if a.n != n:
        raise ParameterError("coefficient dimension does not match n")
    Ms = [int(m) for m in Ms]
    logs = [block_values(a, q, M, nodes_per_unit).log_total for M in Ms]
    pred = (n - 2) * (1 - q / 2) + max((4 - q) / 2, (4 - q) / 3, 2 - q)
    return GeneralBlockResult(n, q, Ms, logs, fit_log_slope(Ms, logs), pred)


def transition_bins(M: int, a: HarmonicCoefficients):
    """Bins G_alpha = [M/2 + alpha M^(1/3), M/2 + (alpha+1) M^(1/3)) with their masses A_alpha.

    Returns rows ``(alpha, k_lo, k_hi, A_alpha)`` for alpha = 0..floor(1.5 M^(2/3)).
    """
    step = M ** (1 / 3)
    rows = []
    for alpha in range(int(math.floor(1.5 * M ** (2 / 3))) + 1):
        lo = M / 2 + alpha * step
        hi = lo + step
        k_lo, k_hi = int(math.ceil(lo)), int(math.ceil(hi)) - 1
        rows.append((alpha, k_lo, k_hi, a.mass(k_lo, k_hi) if k_hi >= k_lo else 0.0))
    return rows
