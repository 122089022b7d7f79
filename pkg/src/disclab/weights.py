"""One-dimensional A_p characteristics, the (M w^s)^(1/s) construction and power weights.

Weights are sampled at cell midpoints of a uniform partition of [-X, X];
every supremum is exhaustive over unions of consecutive cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ParameterError

_CHUNK = 1 << 22


@dataclass(frozen=True, eq=False)
class WeightSamples:
    x: np.ndarray
    values: np.ndarray
    s: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != np.shape(self.x) or not np.all(np.isfinite(v)) or np.any(v < 0) or not np.any(v > 0):
            raise ParameterError("weight values must be nonnegative, finite and not all zero")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, func, cells: int, X: float = 1.0) -> "WeightSamples":
        x = midpoints(cells, X)
        return cls(x, func(x))

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])


def midpoints(cells: int, X: float = 1.0) -> np.ndarray:
    if cells < 2:
        raise ParameterError("need at least two cells")
    h = 2 * X / cells
    return -X + h * (np.arange(cells) + 0.5)


@dataclass
class ApResult:
    p: float
    value: float
    interval: tuple
    trace: list = field(default_factory=list)


def _sup_ratio(a, b, p):
    """max over i < j of mean(a[i:j]) * mean(b[i:j])^(p-1), with the argmax."""
    n = a.size
    A = np.concatenate([[0.0], np.cumsum(a)])
    B = np.concatenate([[0.0], np.cumsum(b)])
    best, arg = -np.inf, (0, 1)
    rows = max(1, _CHUNK // (n + 1))
    j = np.arange(n + 1)[None, :]
    for i0 in range(0, n, rows):
        i = np.arange(i0, min(i0 + rows, n))[:, None]
        length = j - i
        with np.errstate(divide="ignore", invalid="ignore"):
            val = (A[j] - A[i]) / length * ((B[j] - B[i]) / length) ** (p - 1)
        val = np.where(length > 0, val, -np.inf)
        k = int(np.argmax(val))
        if val.flat[k] > best:
            best = float(val.flat[k])
            arg = (int(i[k // val.shape[1], 0]), int(k % val.shape[1]))
    return best, arg


def ap_characteristic(w: WeightSamples, p: float) -> ApResult:
    """sup_I (avg_I w)(avg_I w^(-1/(p-1)))^(p-1) over all cell intervals."""
    if not p > 1:
        raise ParameterError("p must exceed 1")
    v = w.values
    if np.any(v <= 0):
        raise ParameterError("A_p characteristic needs a strictly positive weight")
    if np.all(v == v[0]):
        return ApResult(p, 1.0, (0, v.size))
    val, (i, j) = _sup_ratio(v, v ** (-1 / (p - 1)), p)
    return ApResult(p, max(val, 1.0), (i, j))


def a1_construct(w: WeightSamples, s: float) -> WeightSamples:
    """(M w^s)^(1/s) on the same cells."""
    if not s > 1:
        raise ParameterError("s must exceed 1")
    return WeightSamples(w.x, maximal_all(w.values ** s) ** (1 / s), s)


def maximal_all(values) -> np.ndarray:
    """Discrete maximal function sup_{i<=k<j} mean(values[i:j]) at every k.

    For each pair (i, j) the mean is a candidate for every k in [i, j); the
    running maximum is propagated with two cumulative passes per left end.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    S = np.concatenate([[0.0], np.cumsum(v)])
    out = v.copy()
    j = np.arange(1, n + 1)
    for i in range(n):
        jj = j[i:]
        means = (S[jj] - S[i]) / (jj - i)
        # candidate for k in [i, jj-1]: best mean over intervals [i, j) with j > k
        suffix = np.maximum.accumulate(means[::-1])[::-1]
        np.maximum(out[i:], suffix, out=out[i:])
    return out


@dataclass
class A1Check:
    ratio: float
    trace: list


def a1_lemma_check(w_func, s: float, levels: Sequence[int] = (1024, 2048, 4096), X: float = 1.0) -> A1Check:
    """sup M(W)/W for W = (M w^s)^(1/s) at successive cell counts."""
    if not s > 1:
        raise ParameterError("s must exceed 1")
    trace = []
    for cells in levels:
        w = WeightSamples.from_function(w_func, cells, X)
        W = a1_construct(w, s).values
        trace.append(float(np.max(maximal_all(W) / W)))
    return A1Check(trace[-1], trace)


@dataclass
class PowerRow:
    alpha: float
    p: float
    level: int
    nodes: int
    characteristic: float
    classification: str

    def csv(self) -> str:
        return f"{self.alpha:g},{self.p:g},{self.level},{self.nodes},{self.characteristic:.12e},{self.classification}"


def power_rows_csv(rows) -> str:
    return "alpha,p,level,nodes,characteristic,classification\n" + "".join(r.csv() + "\n" for r in rows)


def power_weight(alpha: float):
    return lambda x: np.abs(x) ** alpha


def power_characteristics(alpha: float, p: float, levels: Sequence[int], X: float = 1.0) -> list:
    return [ap_characteristic(WeightSamples.from_function(power_weight(alpha), c, X), p).value for c in levels]


def classify_growth(trace, threshold: float = 1.5) -> str:
    g = max(b / a for a, b in zip(trace, trace[1:]))
    return "divergent" if g > threshold else "stable"


def sandwich_check(alpha: float, s: float, xs, cells: int = 4096, X: float = 1.0):
    """Bounds (1/(1+s a))^(1/s)|x|^a <= (M |.|^(a s))^(1/s) <= (2/(1+s a))^(1/s)|x|^a at cells nearest xs.

    Returns (lower, value, upper) arrays.
    """
    if not (-1 < alpha <= 0 and s * alpha > -1):
        raise ParameterError("need -1 < alpha <= 0 and s alpha > -1")
    x = midpoints(cells, X)
    M = maximal_all(np.abs(x) ** (alpha * s)) ** (1 / s)
    idx = np.array([int(np.argmin(np.abs(x - q))) for q in xs])
    xa = np.abs(x[idx]) ** alpha
    lower = (1 / (1 + s * alpha)) ** (1 / s) * xa
    upper = (2 / (1 + s * alpha)) ** (1 / s) * xa
    return lower, M[idx], upper


def power_weight_range_scan(p: float, alphas: Sequence[float], levels: Sequence[int] = (1024, 4096, 16384),
                            threshold: float = 1.5, s: float = 1.5, sandwich_x=(1 / 16, 1 / 8, 1 / 4, 1 / 2)):
    """Classify |x|^alpha as stable or divergent from refinement growth of its A_p characteristic."""
    rows, sandwich = [], {}
    for a in alphas:
        trace = power_characteristics(a, p, levels)
        cls = classify_growth(trace, threshold)
        for lev, (c, v) in enumerate(zip(levels, trace)):
            rows.append(PowerRow(a, p, lev, c, v, cls))
        if -1 < a <= 0 and s * a > -1:
            lo, val, up = sandwich_check(a, s, sandwich_x)
            sandwich[a] = bool(np.all(lo <= val) and np.all(val <= up))
    return rows, sandwich
