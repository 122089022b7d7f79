"""Bessel functions of the first kind and the regime estimates for J_nu.

Evaluation strategy for ``J_nu(x)`` (real ``nu > -1``, ``x >= 0``):

* ``x <= 20``: power series summed in extended precision.
* half-integer ``nu <= x``: elementary closed form and upward recurrence.
* otherwise: panel Gauss quadrature of the integral representation

      J_nu(x) = (1/pi) int_0^pi cos(nu t - x sin t) dt
                - (sin(pi nu)/pi) int_0^inf exp(-nu t - x sinh t) dt.

Every value carries an absolute error bound.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ParameterError

SERIES_CUTOFF = 20.0
TOLERANCE = 1e-9
_EPS = np.finfo(float).eps
_LD = np.longdouble
_EPS_LD = float(np.finfo(np.longdouble).eps)

_G8x, _G8w = leggauss(8)
_G5x, _G5w = leggauss(5)
# panel work budget (nodes) per vectorised chunk
_CHUNK = 3_000_000


@dataclass(frozen=True)
class BesselValue:
    value: float
    abs_error_bound: float
    method: str

    def __float__(self):
        return float(self.value)


def _check_inputs(nu, x):
    if not (np.isfinite(nu) and np.isfinite(x)) or nu < 0 or x < 0:
        raise ParameterError(f"need finite nu >= 0 and x >= 0, got ({nu}, {x})")


def _is_half_integer(nu):
    return np.abs(nu - np.floor(nu) - 0.5) < 1e-14


# ---------------------------------------------------------------- series
def _series(nu: np.ndarray, x: np.ndarray):
    """Power series in long double. Requires nu > -1 and x <= ~25."""
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    val = np.zeros(x.shape, dtype=_LD)
    err = np.zeros(x.shape)
    zero = x == 0
    val[zero & (nu == 0)] = 1
    idx = ~zero
    if not idx.any():
        return val.astype(float), err
    v = nu[idx].astype(_LD)
    h = x[idx].astype(_LD) / 2
    lg = np.array([math.lgamma(n + 1) for n in nu[idx]])
    # exp/log in long double keep tiny leading terms representable
    term = np.exp(v * np.log(h) - lg.astype(_LD))
    s = term.copy()
    sabs = np.abs(term)
    h2 = h * h
    done = np.zeros(term.shape, dtype=bool)
    m = 0
    while not done.all():
        m += 1
        term = term * (-h2) / (m * (v + m))
        s = np.where(done, s, s + term)
        sabs = np.where(done, sabs, sabs + np.abs(term))
        small = np.abs(term) <= 1e-18 * np.abs(s)
        done |= (m > h) & (small | (term == 0))
        if m > 400:
            break
    val[idx] = s
    fs = np.abs(s.astype(float))
    # rounding in the long-double sum, log-gamma ulps, final rounding
    err[idx] = (4 * _EPS_LD * (m + 1) * sabs.astype(float)
                + 8 * _EPS * (np.abs(lg) + 1) * fs + _EPS * fs)
    return val.astype(float), err


# ---------------------------------------------------------- half integer
def _half_integer(nu: np.ndarray, x: np.ndarray):
    """Closed forms for nu = m + 1/2 (m >= -1) by upward recurrence."""
    nu = np.asarray(nu, dtype=float)
    x = np.asarray(x, dtype=float)
    steps = np.rint(nu + 0.5).astype(int)  # nu = -1/2 + steps
    amp = np.sqrt(2 / (np.pi * x))
    jm = amp * np.cos(x)  # J_{-1/2}
    j = amp * np.sin(x)  # J_{1/2}
    out = np.where(steps == 0, jm, j)
    order = 0.5
    with np.errstate(over="ignore", invalid="ignore"):
        # entries past their own order may overflow; they are never read
        for k in range(1, int(steps.max(initial=0))):
            jn = (2 * order / x) * j - jm
            jm, j = j, jn
            order += 1
            out = np.where(steps == k + 1, j, out)
    err = 8 * _EPS * (steps + 2) ** 2 * amp
    return out, err


# --------------------------------------------------------------- integral
def _panel_counts(nu, x):
    return np.maximum(1, np.ceil(2 * (np.abs(nu) + x))).astype(int)


def _oscillatory_part(nu: np.ndarray, x: np.ndarray):
    """(1/pi) int_0^pi cos(nu t - x sin t) dt with Gauss-8 panels."""
    P = _panel_counts(nu, x)
    val = np.empty(nu.shape)
    err = np.empty(nu.shape)
    order = np.argsort(P, kind="stable")
    i = 0
    while i < order.size:
        pmax = P[order[i]]
        j = i + 1
        while j < order.size and (j - i + 1) * P[order[j]] * 8 <= _CHUNK:
            j += 1
        sel = order[i:j]
        pmax = P[order[j - 1]]
        h = np.pi / pmax
        left = np.arange(pmax) * h
        n = nu[sel][:, None, None]
        xx = x[sel][:, None, None]
        t8 = left[None, :, None] + (h / 2) * (_G8x + 1)[None, None, :]
        t5 = left[None, :, None] + (h / 2) * (_G5x + 1)[None, None, :]
        f8 = np.cos(n * t8 - xx * np.sin(t8))
        f5 = np.cos(n * t5 - xx * np.sin(t5))
        q8 = (f8 @ _G8w) * (h / 2)
        q5 = (f5 @ _G5w) * (h / 2)
        val[sel] = q8.sum(axis=1) / np.pi
        err[sel] = (np.abs(q8 - q5).sum(axis=1) + 16 * _EPS * pmax * h) / np.pi
        i = j
    return val, err


def _tail_part(nu: np.ndarray, x: np.ndarray):
    """int_0^inf exp(-nu t - x sinh t) dt, substituting u = nu t + x sinh t."""
    U = math.log(1e18)
    npanel = int(math.ceil(U))
    edges = np.linspace(0.0, U, npanel + 1)
    hw = (edges[1] - edges[0]) / 2

    def integrate(gx, gw):
        u = (edges[:-1, None] + hw * (gx + 1)[None, :]).ravel()
        n = nu[:, None]
        xx = x[:, None]
        t = np.arcsinh(u[None, :] / np.maximum(xx, 1e-300))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            t = np.where(xx > 0, t, u[None, :] / n)
            t = np.minimum(t, np.where(n > 0, u[None, :] / n, np.inf))
        for _ in range(60):
            f = n * t + xx * np.sinh(t) - u[None, :]
            step = f / (n + xx * np.cosh(t))
            t = t - step
            if np.all(np.abs(step) <= 1e-16 * np.maximum(1, np.abs(t))):
                break
        g = np.exp(-u)[None, :] / (n + xx * np.cosh(t))
        g = g.reshape(nu.size, npanel, gx.size)
        return (g @ gw) * hw

    q8 = integrate(_G8x, _G8w)
    q5 = integrate(_G5x, _G5w)
    val = q8.sum(axis=1)
    trunc = 1e-18 / np.maximum(nu + x, 1e-300)
    err = np.abs(q8 - q5).sum(axis=1) + trunc + 16 * _EPS * val
    return val, err


def _integral(nu: np.ndarray, x: np.ndarray):
    val, err = _oscillatory_part(nu, x)
    frac = np.abs(nu - np.rint(nu)) > 0
    if frac.any():
        s = np.sin(np.pi * nu[frac]) / np.pi
        tv, te = _tail_part(nu[frac], x[frac])
        val[frac] -= s * tv
        err[frac] += np.abs(s) * te
    return val, err


# ------------------------------------------------------------- dispatcher
def _evaluate(nu, x):
    """Vectorised J_nu(x) for nu > -1 (plus integer nu = -1), x >= 0."""
    nu, x = np.broadcast_arrays(np.asarray(nu, dtype=float), np.asarray(x, dtype=float))
    shape = nu.shape
    nu = nu.ravel().copy()
    x = x.ravel().copy()
    val = np.zeros(nu.shape)
    err = np.zeros(nu.shape)
    method = np.empty(nu.shape, dtype=object)
    sign = np.ones(nu.shape)
    neg_int = nu == -1  # J_{-1} = -J_1
    nu[neg_int] = 1
    sign[neg_int] = -1

    ser = x <= SERIES_CUTOFF
    half = ~ser & _is_half_integer(nu) & (nu <= x)
    quad = ~ser & ~half
    if ser.any():
        val[ser], err[ser] = _series(nu[ser], x[ser])
        method[ser] = "series"
    if half.any():
        val[half], err[half] = _half_integer(nu[half], x[half])
        method[half] = "closed_form_half_integer"
    if quad.any():
        val[quad], err[quad] = _integral(nu[quad], x[quad])
        method[quad] = "integral_representation"
    return (sign * val).reshape(shape), err.reshape(shape), method.reshape(shape)


def jv(nu, x, return_error: bool = False):
    """Array version of :func:`bessel_j`.

    Parameters
    ----------
    nu, x : array_like
        Broadcast together; ``nu >= 0`` and ``x >= 0``.
    return_error : bool
        Also return the absolute error bounds.
    """
    nu_a = np.asarray(nu, dtype=float)
    x_a = np.asarray(x, dtype=float)
    if np.any(nu_a < 0) or np.any(x_a < 0) or not (np.all(np.isfinite(nu_a)) and np.all(np.isfinite(x_a))):
        raise ParameterError("jv needs finite nonnegative order and argument")
    val, err, _ = _evaluate(nu_a, x_a)
    return (val, err) if return_error else val


def jvp(nu, x, return_error: bool = False):
    """Derivative J_nu'(x) via the three-term relations.

    For ``nu >= 1`` uses ``(J_{nu-1} - J_{nu+1})/2``; for ``0 <= nu < 1``
    uses ``J_{nu-1} - (nu/x) J_nu`` (``-J_1`` when ``nu = 0``).
    """
    nu_a, x_a = np.broadcast_arrays(np.asarray(nu, dtype=float), np.asarray(x, dtype=float))
    if np.any(nu_a < 0) or np.any(x_a < 0):
        raise ParameterError("jvp needs nonnegative order and argument")
    val = np.empty(nu_a.shape)
    err = np.empty(nu_a.shape)
    big = nu_a >= 1
    if big.any():
        a, ea, _ = _evaluate(nu_a[big] - 1, x_a[big])
        b, eb, _ = _evaluate(nu_a[big] + 1, x_a[big])
        val[big] = (a - b) / 2
        err[big] = (ea + eb) / 2 + _EPS * np.abs(val[big])
    small = ~big
    if small.any():
        n = nu_a[small]
        xs = x_a[small]
        v = np.empty(n.shape)
        e = np.empty(n.shape)
        z = n == 0
        if z.any():
            j1, e1, _ = _evaluate(np.ones(z.sum()), xs[z])
            v[z], e[z] = -j1, e1
        f = ~z
        if f.any():
            nf, xf = n[f], xs[f]
            with np.errstate(divide="ignore", invalid="ignore"):
                pos = xf > 0
                vf = np.full(nf.shape, np.inf)
                ef = np.full(nf.shape, np.inf)
                if pos.any():
                    a, ea, _ = _evaluate(nf[pos] - 1, xf[pos])
                    b, eb, _ = _evaluate(nf[pos], xf[pos])
                    vf[pos] = a - nf[pos] / xf[pos] * b
                    ef[pos] = ea + nf[pos] / xf[pos] * eb
            v[f], e[f] = vf, ef
        val[small], err[small] = v, e
    return (val, err) if return_error else val


def bessel_j(nu: float, x: float) -> BesselValue:
    """J_nu(x) with an absolute error bound and the method used.

    Examples
    --------
    >>> round(bessel_j(0.5, math.pi / 2).value, 10)
    0.6366197724
    """
    _check_inputs(nu, x)
    v, e, m = _evaluate(np.array([nu]), np.array([x]))
    return BesselValue(float(v[0]), float(e[0]), str(m[0]))


def bessel_j_prime(nu: float, x: float) -> BesselValue:
    _check_inputs(nu, x)
    v, e = jvp(np.array([nu]), np.array([x]), return_error=True)
    if nu >= 1:
        method = _evaluate(np.array([nu - 1]), np.array([x]))[2][0]
    else:
        method = _evaluate(np.array([nu]), np.array([x]))[2][0]
    return BesselValue(float(v[0]), float(e[0]), str(method))


def bessel_sequence(nu0: float, kmax: int, x) -> np.ndarray:
    """J_{nu0 + k}(x) for k = 0..kmax, shape ``(kmax + 1, len(x))``.

    Backward (Miller) recurrence from well above ``max(kmax, x)`` gives the
    minimal solution up to one factor per ``x``, fixed by a direct
    evaluation at the order where the sequence is largest.  Values deep
    in the decaying region keep full relative accuracy.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0):
        raise ParameterError("bessel_sequence needs x > 0")
    xm = float(x.max())
    start = int(max(kmax, xm) + 20 + 10 * xm ** (1 / 3))
    seq = np.zeros((kmax + 1, x.size))
    log_scale = np.zeros(x.size)
    j_next = np.zeros(x.size)
    j_cur = np.full(x.size, 1e-300)
    for k in range(start, 0, -1):
        order = nu0 + k
        j_prev = (2 * order / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        if k - 1 <= kmax:
            seq[k - 1] = j_cur
        big = np.abs(j_cur) > 1e250
        if big.any():
            j_cur[big] *= 1e-250
            j_next[big] *= 1e-250
            seq[:, big] *= 1e-250
            log_scale[big] += 250
    # anchor: largest |seq| entry per column, where J is O(x^(-1/3))
    anchor = np.argmax(np.abs(seq), axis=0)
    direct = jv(nu0 + anchor, x)
    factor = direct / seq[anchor, np.arange(x.size)]
    return seq * factor[None, :]


def log_bessel_decay(nu0: float, k_lo: int, k_hi: int, x) -> np.ndarray:
    """log J_{nu0 + k}(x) for k = k_lo..k_hi where every order is >= x.

    In that range J is positive and decreasing in the order, so the ratios
    J_{m}/J_{m-1} = 1 / (2m/x - J_{m+1}/J_m) from a backward continued
    fraction are accurate, and the sum of their logs is anchored by one
    direct evaluation at the lowest order.  No underflow however deep.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0) or np.any(nu0 + k_lo < x):
        raise ParameterError("log_bessel_decay needs 0 < x <= nu0 + k_lo")
    # anchor at the first order >= x, where J is O(x^(-1/3)) and never underflows
    k0 = np.maximum(np.ceil(x - nu0), 0).astype(int)
    base = int(k0.min())
    start = int(k_hi + 30 + 10 * float(x.max()) ** (1 / 3))
    ratio = np.zeros(x.size)
    logs = np.zeros((k_hi - base + 1, x.size))
    for m in range(start, base, -1):
        ratio = 1.0 / (2 * (nu0 + m) / x - ratio)
        if m <= k_hi:
            with np.errstate(invalid="ignore", divide="ignore"):
                logs[m - base] = np.log(ratio)
    cols = np.arange(x.size)
    logs[k0 - base, cols] = np.log(jv(nu0 + k0, x))
    orders = np.arange(base, k_hi + 1)[:, None]
    logs = np.where(orders >= k0[None, :], logs, 0.0)
    out = np.cumsum(logs, axis=0)
    return out[k_lo - base:]


# ---------------------------------------------------------------- regimes
REGIMES = ("oscillatory", "subcritical", "transition_above", "transition_below")


@dataclass(frozen=True)
class RegimeTag:
    tag: str
    rho: float | None = None


def classify_regime(nu: float, x: float) -> RegimeTag:
    """Place (nu, x) in one of the four regimes of the Bessel estimates."""
    if nu < 1:
        raise ParameterError("regimes are defined for nu >= 1")
    if x < 0:
        raise ParameterError("x must be nonnegative")
    if x >= 1.5 * nu:
        return RegimeTag("oscillatory")
    c = nu ** (1 / 3)
    rho = abs(x - nu) / c
    if x > nu and 1 <= rho < 0.5 * nu ** (2 / 3):
        return RegimeTag("transition_above", rho)
    if x < nu and 1 <= rho < nu ** (2 / 3):
        return RegimeTag("transition_below", rho)
    return RegimeTag("subcritical")


def vdc_bound(tag: RegimeTag, nu: float, x: float) -> tuple[float, float]:
    """Envelope (for J_nu, for J_nu') of the regime, constants dropped."""
    if tag.tag == "oscillatory":
        b = x ** -0.5
        return b, b
    if tag.tag == "subcritical":
        return 1 / (1 + nu), 1 / (1 + nu) ** 2
    rho = tag.rho
    if tag.tag == "transition_above":
        return rho ** -0.25 * nu ** (-1 / 3), rho ** 0.25 * nu ** (-2 / 3)
    if tag.tag == "transition_below":
        return 1 / (rho * nu ** (1 / 3)), 1 / (rho ** 2 * nu ** (2 / 3))
    raise ParameterError(f"unknown regime {tag.tag!r}")


def _bounds_array(regime, nu, x):
    c = nu ** (1 / 3)
    if regime == "oscillatory":
        b = x ** -0.5
        return b, b.copy()
    if regime == "subcritical":
        return np.full_like(x, 1 / (1 + nu)), np.full_like(x, 1 / (1 + nu) ** 2)
    rho = np.abs(x - nu) / c
    if regime == "transition_above":
        return rho ** -0.25 / c, rho ** 0.25 / c ** 2
    return 1 / (rho * c), 1 / (rho ** 2 * c ** 2)


def regime_samples(nu: float, regime: str, count: int) -> np.ndarray:
    """Sample arguments inside one regime for a given order.

    The oscillatory envelope ratio decreases in x, so its samples fill a
    six-wavelength window starting at 3nu/2 where the supremum sits.
    """
    c = nu ** (1 / 3)
    if regime == "oscillatory":
        lo = 1.5 * nu
        wl = 2 * np.pi / math.sqrt(1 - (nu / lo) ** 2)
        return np.linspace(lo, lo + 6 * wl, count)
    if regime == "transition_above":
        lo, hi = nu + c, 1.5 * nu
        return np.linspace(lo, hi, count, endpoint=False)
    if regime == "transition_below":
        # rho in [1, nu^(2/3)) maps to x in (0, nu - c]
        return np.linspace(nu - c, 0, count, endpoint=False)
    if regime == "subcritical":
        return np.linspace(nu - c, nu + c, count + 2)[1:-1]
    raise ParameterError(f"unknown regime {regime!r}")


@dataclass
class ScanRow:
    nu: float
    x: float
    regime: str
    value: float
    bound: float
    ratio: float

    def csv(self):
        return f"{self.nu:.16g},{self.x:.16e},{self.regime},{self.value:.16e},{self.bound:.16e},{self.ratio:.16e}"


@dataclass
class VdcReport:
    rows: list
    max_ratio: dict
    asymptotic: dict
    flags: list = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["nu,x_or_p,regime,value,bound,ratio"]
        lines += [r.csv() for r in self.rows]
        return "\n".join(lines) + "\n"


def asymptotic_ratio(nu: float, x_far: float = 5000 - 4 * np.pi, count: int = 128):
    """Max of |J_nu| sqrt(x) and |J_nu'| sqrt(x) over a 4 pi window ending at x_far."""
    xs = np.linspace(x_far - 4 * np.pi, x_far, count)
    j = jv(nu, xs)
    jp = jvp(nu, xs)
    return float(np.max(np.abs(j) * np.sqrt(xs))), float(np.max(np.abs(jp) * np.sqrt(xs)))


def vdc_scan(nu_list, samples_per_regime: int = 512, x_far: float = 5000 - 4 * np.pi) -> VdcReport:
    """Worst ratios |J|/bound and |J'|/bound per regime over the orders given.

    In the upper transition band the derivative ratio is taken against the
    smaller of the band envelope and the oscillatory envelope x^(-1/2);
    this substitution is recorded in ``flags``.
    """
    nus = [float(n) for n in nu_list]
    if any(n < 1 for n in nus):
        raise ParameterError("vdc_scan needs nu >= 1")
    rows = []
    max_ratio = {}
    flags = []
    for regime in REGIMES:
        worst = {"J": (0.0, None), "dJ": (0.0, None)}
        for nu in nus:
            xs = regime_samples(nu, regime, samples_per_regime)
            xs = xs[[classify_regime(nu, v).tag == regime for v in xs]]
            if xs.size == 0:
                continue
            j = jv(nu, xs)
            jp = jvp(nu, xs)
            bj, bp = _bounds_array(regime, nu, xs)
            if regime == "transition_above":
                alt = xs ** -0.5
                if np.any(alt < bp):
                    flags.append(f"transition_above derivative bound replaced by x^-1/2 at nu={nu:g}")
                bp = np.minimum(bp, alt)
            for key, vals, bnd in (("J", j, bj), ("dJ", jp, bp)):
                ratio = np.abs(vals) / bnd
                i = int(np.argmax(ratio))
                name = regime if key == "J" else regime + "_prime"
                rows.append(ScanRow(nu, float(xs[i]), name, float(vals[i]), float(bnd[i]), float(ratio[i])))
                if ratio[i] > worst[key][0]:
                    worst[key] = (float(ratio[i]), (nu, float(xs[i])))
        max_ratio[regime] = worst["J"][0]
        max_ratio[regime + "_prime"] = worst["dJ"][0]
    asym = {}
    for nu in nus:
        a, b = asymptotic_ratio(nu, x_far)
        asym[nu] = (a, b)
        rows.append(ScanRow(nu, x_far, "asymptotic", a, 1.0, a))
        rows.append(ScanRow(nu, x_far, "asymptotic_prime", b, 1.0, b))
    return VdcReport(rows, max_ratio, asym, flags)


def prodj_integral(nu: float, p: float, nodes_per_wavelength: int = 40) -> float:
    """(1/nu) int_{nu/2}^{2nu} |J_nu(r) r^(1/2)|^p dr by trapezoid quadrature."""
    if nu < 2 or p <= 0:
        raise ParameterError("prodj_integral needs nu >= 2 and p > 0")
    if nodes_per_wavelength < 20:
        raise ParameterError("need at least 20 nodes per wavelength")
    a, b = nu / 2, 2 * nu
    n = int(math.ceil((b - a) / (2 * np.pi) * nodes_per_wavelength)) + 1
    r = np.linspace(a, b, n)
    f = np.abs(jv(nu, r) * np.sqrt(r)) ** p
    return float(np.trapezoid(f, r) / nu)


def prodj_csv(rows) -> str:
    """Rows of (nu, p, value) in the scan CSV layout."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["nu", "x_or_p", "regime", "value", "bound", "ratio"])
    for nu, p, v in rows:
        w.writerow([f"{nu:.16g}", f"{p:.16g}", "critical", f"{v:.16e}", "", ""])
    return buf.getvalue()
