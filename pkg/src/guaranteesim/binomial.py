"""Exact binomial machinery and lower confidence-bound procedures.

Everything here is exact up to floating point: pmf values come from
log-gamma arithmetic, Clopper-Pearson bounds from bisection on the
binomial survival function, and coverage numbers from enumeration over
all n+1 outcomes. No sampling, no approximation beyond the Wald formula
itself (which is the point of including it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln

__all__ = [
    "binom_pmf",
    "binom_pmf_vector",
    "binom_survival",
    "normal_cdf",
    "normal_quantile",
    "clopper_pearson_lower",
    "clopper_pearson_lower_vector",
    "wald_lower",
    "wald_lower_vector",
    "LowerBoundProcedure",
    "CoverageReport",
    "exact_lower_coverage",
    "exceedance_prob",
    "coverage_report",
    "sup_false_positive",
    "probability_grid",
    "refined_grid_max",
]

ROOT_TOL = 1e-10
QUANTILE_TOL = 1e-9


def _check_law(n: int, p: float) -> None:
    if n < 1:
        raise ValueError(f"need at least one trial, got n={n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"success probability must lie in [0,1], got {p}")


def binom_pmf(n: int, p: float, x: int) -> float:
    """Pr(X = x) for X ~ Binomial(n, p), computed in log space."""
    _check_law(n, p)
    if not 0 <= x <= n:
        raise ValueError(f"count x={x} outside 0..{n}")
    if p == 0.0:
        return 1.0 if x == 0 else 0.0
    if p == 1.0:
        return 1.0 if x == n else 0.0
    logc = math.lgamma(n + 1) - math.lgamma(x + 1) - math.lgamma(n - x + 1)
    return math.exp(logc + x * math.log(p) + (n - x) * math.log1p(-p))


def binom_pmf_vector(n: int, p: float) -> np.ndarray:
    """All n+1 pmf values at once; same log-space route as binom_pmf."""
    _check_law(n, p)
    xs = np.arange(n + 1)
    if p == 0.0:
        out = np.zeros(n + 1)
        out[0] = 1.0
        return out
    if p == 1.0:
        out = np.zeros(n + 1)
        out[n] = 1.0
        return out
    logc = gammaln(n + 1) - gammaln(xs + 1) - gammaln(n - xs + 1)
    return np.exp(logc + xs * math.log(p) + (n - xs) * math.log1p(-p))


def binom_survival(x: int, n: int, p: float) -> float:
    """Pr(X >= x). Summation of exact pmf values, no beta-function shortcut."""
    if x <= 0:
        return 1.0
    if x > n:
        return 0.0
    return float(binom_pmf_vector(n, p)[x:].sum())


# ---------------------------------------------------------------------------
# Normal quantile: rational approximation plus one Newton refinement.

_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def _normal_quantile_approx(q: float) -> float:
    if q < _P_LOW:
        r = math.sqrt(-2.0 * math.log(q))
        num = ((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]
        den = (((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0
        return num / den
    if q > 1.0 - _P_LOW:
        r = math.sqrt(-2.0 * math.log(1.0 - q))
        num = ((((_C[0] * r + _C[1]) * r + _C[2]) * r + _C[3]) * r + _C[4]) * r + _C[5]
        den = (((_D[0] * r + _D[1]) * r + _D[2]) * r + _D[3]) * r + 1.0
        return -num / den
    u = q - 0.5
    r = u * u
    num = ((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num * u / den


def normal_quantile(q: float) -> float:
    """Inverse standard-normal cdf, |Phi(z) - q| <= 1e-9."""
    if not 0.0 < q < 1.0:
        raise ValueError(f"quantile level must lie strictly in (0,1), got {q}")
    z = _normal_quantile_approx(q)
    # one Newton step against the erfc-based cdf tightens the rational
    # approximation from ~1e-9 relative to near machine precision
    pdf = math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)
    if pdf > 0.0:
        z -= (normal_cdf(z) - q) / pdf
    return z


# ---------------------------------------------------------------------------
# Lower confidence bounds.

def clopper_pearson_lower(x: int, n: int, alpha_prime: float, tol: float = ROOT_TOL) -> float:
    """Exact lower bound: the p solving Pr(X >= x | n, p) = alpha_prime.

    x = 0 returns 0. Bisection is safe because the survival function is
    strictly increasing in p for x >= 1.
    """
    _check_cp_args(x, n, alpha_prime)
    if x == 0:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if binom_survival(x, n, mid) > alpha_prime:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def clopper_pearson_lower_vector(n: int, alpha_prime: float, tol: float = ROOT_TOL,
                                 chunk: int = 512) -> np.ndarray:
    """Bounds for every x = 0..n via simultaneous bisection.

    Each chunk of x values shares its iteration loop; the survival sums are
    evaluated as a (rows x n+1) pmf matrix per step, so memory stays bounded
    for large n.
    """
    if n < 1:
        raise ValueError(f"need at least one trial, got n={n}")
    if not 0.0 < alpha_prime < 1.0:
        raise ValueError(f"nominal level must lie in (0,1), got {alpha_prime}")
    out = np.zeros(n + 1)
    js = np.arange(n + 1)
    logc = gammaln(n + 1) - gammaln(js + 1) - gammaln(n - js + 1)
    n_iter = int(math.ceil(math.log2(1.0 / tol)))
    for start in range(1, n + 1, chunk):
        xs = np.arange(start, min(start + chunk, n + 1))
        lo = np.zeros(len(xs))
        hi = np.ones(len(xs))
        for _ in range(n_iter):
            mid = 0.5 * (lo + hi)
            logpmf = (logc[None, :]
                      + js[None, :] * np.log(mid)[:, None]
                      + (n - js)[None, :] * np.log1p(-mid)[:, None])
            pmf = np.exp(logpmf)
            # survival Pr(X >= x_i) at p = mid_i: right-to-left cumulative sum
            tail = np.cumsum(pmf[:, ::-1], axis=1)[:, ::-1]
            surv = tail[np.arange(len(xs)), xs]
            above = surv > alpha_prime
            hi = np.where(above, mid, hi)
            lo = np.where(above, lo, mid)
        out[xs] = 0.5 * (lo + hi)
    return out


def _check_cp_args(x: int, n: int, alpha_prime: float) -> None:
    if n < 1:
        raise ValueError(f"need at least one trial, got n={n}")
    if not 0 <= x <= n:
        raise ValueError(f"count x={x} outside 0..{n}")
    if not 0.0 < alpha_prime < 1.0:
        raise ValueError(f"nominal level must lie in (0,1), got {alpha_prime}")


def wald_lower(x: int, n: int, alpha_prime: float) -> float:
    """Normal-approximation lower bound, clamped to [0,1].

    x in {0, n} gives zero standard error, hence the raw point estimate.
    """
    _check_cp_args(x, n, alpha_prime)
    phat = x / n
    z = normal_quantile(1.0 - alpha_prime)
    bound = phat - z * math.sqrt(phat * (1.0 - phat) / n)
    return min(1.0, max(0.0, bound))


def wald_lower_vector(n: int, alpha_prime: float) -> np.ndarray:
    phat = np.arange(n + 1) / n
    z = normal_quantile(1.0 - alpha_prime)
    bound = phat - z * np.sqrt(phat * (1.0 - phat) / n)
    return np.clip(bound, 0.0, 1.0)


@dataclass(frozen=True)
class LowerBoundProcedure:
    """A lower confidence-bound rule x -> L(x) at a fixed sample size."""

    kind: str  # "clopper_pearson" or "wald"
    nominal_alpha: float
    n: int

    def __post_init__(self):
        if self.kind not in ("clopper_pearson", "wald"):
            raise ValueError(f"unknown procedure kind {self.kind!r}")
        if not 0.0 < self.nominal_alpha < 1.0:
            raise ValueError(f"nominal level must lie in (0,1), got {self.nominal_alpha}")
        if self.n < 1:
            raise ValueError(f"need at least one trial, got n={self.n}")

    @cached_property
    def bounds(self) -> np.ndarray:
        """L(x) for every x = 0..n."""
        if self.kind == "clopper_pearson":
            return clopper_pearson_lower_vector(self.n, self.nominal_alpha)
        return wald_lower_vector(self.n, self.nominal_alpha)

    def bound(self, x: int) -> float:
        if not 0 <= x <= self.n:
            raise ValueError(f"count x={x} outside 0..{self.n}")
        return float(self.bounds[x])


def exact_lower_coverage(proc, p: float) -> float:
    """Pr(L <= p) by enumeration over all outcomes at success rate p."""
    pmf = binom_pmf_vector(proc.n, p)
    return float(pmf[np.asarray(proc.bounds) <= p].sum())


def exceedance_prob(proc, p: float, threshold: float) -> float:
    """Pr(L > threshold) when outcomes are drawn at success rate p.

    Defined as 1 - coverage at the threshold so that the pair sums to one
    exactly, not just within rounding.
    """
    pmf = binom_pmf_vector(proc.n, p)
    return 1.0 - float(pmf[np.asarray(proc.bounds) <= threshold].sum())


@dataclass(frozen=True)
class CoverageReport:
    kind: str
    nominal_alpha: float
    n: int
    p_grid: np.ndarray
    coverage: np.ndarray
    violation: np.ndarray  # Pr(L > p) at each grid p

    @property
    def min_coverage(self) -> float:
        return float(self.coverage.min())

    @property
    def worst_p(self) -> float:
        return float(self.p_grid[int(self.coverage.argmin())])


def coverage_report(proc, p_grid) -> CoverageReport:
    grid = np.asarray(p_grid, dtype=float)
    cov = np.array([exact_lower_coverage(proc, p) for p in grid])
    return CoverageReport(
        kind=getattr(proc, "kind", "custom"),
        nominal_alpha=getattr(proc, "nominal_alpha", float("nan")),
        n=proc.n,
        p_grid=grid,
        coverage=cov,
        violation=1.0 - cov,
    )


def probability_grid(denom: int = 1024, lo: float = 0.0, hi: float = 1.0,
                     open_ends: bool = True) -> np.ndarray:
    """Evenly spaced multiples of 1/denom inside [lo, hi].

    open_ends drops points equal to lo or hi, which strict-inequality
    suprema require.
    """
    if denom < 2:
        raise ValueError(f"grid denominator must be at least 2, got {denom}")
    ks = np.arange(0, denom + 1)
    grid = ks / denom
    if open_ends:
        keep = (grid > lo) & (grid < hi)
    else:
        keep = (grid >= lo) & (grid <= hi)
    return grid[keep]


def refined_grid_max(fn, base_grid, refine_denom: int, lo: float, hi: float):
    """Maximize fn over base_grid, then over a finer lattice near the argmax.

    The refinement window spans one base step either side of the coarse
    argmax, clipped to the open interval (lo, hi). Returns (value, argmax).
    """
    base = np.asarray(base_grid, dtype=float)
    if base.size == 0:
        raise ValueError("empty probability grid")
    vals = [fn(p) for p in base]
    k = int(np.argmax(vals))
    best_p, best_v = float(base[k]), float(vals[k])
    if refine_denom and base.size > 1:
        step = float(np.diff(base).max())
        w_lo = max(best_p - step, lo)
        w_hi = min(best_p + step, hi)
        first = int(w_lo * refine_denom) + 1
        last = int(math.ceil(w_hi * refine_denom))
        for j in range(first, last):
            p = j / refine_denom
            if not (w_lo < p < w_hi and lo < p < hi):
                continue
            v = fn(p)
            if v > best_v:
                best_p, best_v = p, v
    return best_v, best_p


def sup_false_positive(proc, p0: float, grid=None, refine_denom: int = 8192) -> float:
    """sup over p < p0 of Pr(L > p0), the decision rule's false positive rate."""
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"threshold must lie strictly in (0,1), got {p0}")
    if grid is None:
        grid = probability_grid(512, lo=0.0, hi=p0)
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty probability grid")
    if (grid >= p0).any():
        raise ValueError("sup grid must lie strictly below the threshold")
    value, _ = refined_grid_max(
        lambda p: exceedance_prob(proc, p, p0), grid, refine_denom, 0.0, p0
    )
    return value
