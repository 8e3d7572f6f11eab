"""Sample sizes needed to tell two features apart by their error rates.

Two calculators are provided.  The counting one treats per-instance
correctness of the two single-feature classifiers as a pair of Bernoulli
variables and sizes a McNemar test on their disagreement cells.  The
smoothed one assumes continuous per-instance correctness scores and sizes
a (normal-approximation) paired test, which is a lower bound on what a
rank test would need.

The chi-squared and normal quantile kernels are implemented natively
(incomplete-gamma / erf based CDFs inverted by bisection) so results can
be validated against brute-force CDF integration without any dependency.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

_EPS = 1e-15
_MAX_ITER = 500


# ---------------------------------------------------------------------------
# quantile kernels
# ---------------------------------------------------------------------------

def _lower_gamma_reg(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if x < 0 or a <= 0:
        raise ValueError("require x >= 0 and a > 0")
    if x == 0.0:
        return 0.0
    log_prefix = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        # series representation
        term = 1.0 / a
        total = term
        ap = a
        for _ in range(_MAX_ITER):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                break
        return min(1.0, total * math.exp(log_prefix))
    # continued fraction (modified Lentz) for the upper tail
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    upper = math.exp(log_prefix) * h
    return max(0.0, 1.0 - upper)


def chi2_cdf(x: float, dof: int) -> float:
    """CDF of the chi-squared distribution with ``dof`` degrees of freedom."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if x <= 0:
        return 0.0
    return _lower_gamma_reg(dof / 2.0, x / 2.0)


def chi2_sf(x: float, dof: int) -> float:
    """Survival function 1 - CDF, computed without cancellation for small tails."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if x <= 0:
        return 1.0
    return max(0.0, min(1.0, 1.0 - _lower_gamma_reg(dof / 2.0, x / 2.0)))


def chi2_inv_cdf(q: float, dof: int) -> float:
    """Quantile of the chi-squared distribution, |error| < 1e-6.

    Inverts :func:`chi2_cdf` by bisection on an expanding bracket.
    """
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly between 0 and 1")
    if dof < 1:
        raise ValueError("dof must be >= 1")
    hi = dof + 10.0 * math.sqrt(2.0 * dof) + 10.0
    while chi2_cdf(hi, dof) < q:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_cdf(mid, dof) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def normal_cdf(x: float) -> float:
    """Standard normal CDF via the error function."""
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def normal_inv_cdf(q: float) -> float:
    """Standard normal quantile, |error| < 1e-6, by bisection on the erf CDF."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly between 0 and 1")
    lo, hi = -40.0, 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if normal_cdf(mid) < q:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McNemarPlan:
    """Inputs for the counting (McNemar) sample-size formula.

    p1, p2   probabilities that the single-feature classifiers are correct
             (strictly p1 > p2: feature 1 is the genuinely better one)
    d_agree  probability both are simultaneously correct
    alpha    significance level
    """

    p1: float
    p2: float
    d_agree: float
    alpha: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.p2 < self.p1 < 1.0:
            if self.p1 == self.p2:
                raise ValueError(
                    "p1 == p2: no detectable difference between the features"
                )
            raise ValueError("require 0 < p2 < p1 < 1")
        lo = max(0.0, self.p1 + self.p2 - 1.0)
        hi = min(self.p1, self.p2)
        if not lo - 1e-12 <= self.d_agree <= hi + 1e-12:
            raise ValueError(
                f"agreement d={self.d_agree} outside [{lo}, {hi}] allowed by p1, p2"
            )
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")

    def cell_probabilities(self) -> tuple[float, float, float, float]:
        """Joint outcome probabilities (neither, only first, only second, both)."""
        both = self.d_agree
        first_only = self.p1 - both
        second_only = self.p2 - both
        neither = 1.0 - first_only - second_only - both
        return neither, first_only, second_only, both

    def cell_counts(self, n: float) -> tuple[float, float, float, float]:
        """Expected counts of the four outcomes in a sample of size ``n``."""
        return tuple(n * p for p in self.cell_probabilities())

    @staticmethod
    def independent(p1: float, p2: float, alpha: float = 0.05) -> "McNemarPlan":
        """Plan under independence of the two correctness indicators (d = p1*p2)."""
        return McNemarPlan(p1=p1, p2=p2, d_agree=p1 * p2, alpha=alpha)


@dataclass(frozen=True)
class SmoothedPlan:
    """Inputs for the continuous-score (normal approximation) formula.

    p1, p2      expected per-instance correctness scores
    var1, var2  their variances
    cov         covariance between the two scores
    alpha       significance level
    two_tailed  use alpha/2 (larger N); one-tailed by default
    """

    p1: float
    p2: float
    var1: float
    var2: float
    cov: float = 0.0
    alpha: float = 0.05
    two_tailed: bool = False

    def __post_init__(self):
        if not self.p1 > self.p2:
            raise ValueError("require p1 > p2")
        if self.var1 < 0 or self.var2 < 0:
            raise ValueError("variances must be non-negative")
        if abs(self.cov) > math.sqrt(self.var1 * self.var2) + 1e-12:
            raise ValueError("|cov| cannot exceed sqrt(var1*var2)")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")


# ---------------------------------------------------------------------------
# sample sizes
# ---------------------------------------------------------------------------

def mcnemar_sample_size(plan: McNemarPlan) -> float:
    """Sample size N at which the McNemar test separates the two features.

    N = chi2_inv(1 - alpha; 1) * (p1 + p2 - 2 d) / (p1 - p2)^2.
    Returned as a real number; callers may take the ceiling.
    """
    crit = chi2_inv_cdf(1.0 - plan.alpha, 1)
    gap = plan.p1 - plan.p2
    return crit * (plan.p1 + plan.p2 - 2.0 * plan.d_agree) / (gap * gap)


def smoothed_sample_size(plan: SmoothedPlan) -> float:
    """Sample size for the continuous-score paired comparison.

    N = Phi^{-1}(1 - alpha') * (var1 + var2 - 2 cov) / (p1 - p2)^2 with
    alpha' = alpha/2 when two-tailed.  A non-positive pooled variance
    (perfectly covarying scores) needs no sample at all and returns 0.
    """
    pooled = plan.var1 + plan.var2 - 2.0 * plan.cov
    if pooled <= 0.0:
        if pooled < 0.0:
            warnings.warn(
                "variance of the score difference is non-positive; returning 0",
                RuntimeWarning,
                stacklevel=2,
            )
        return 0.0
    alpha = plan.alpha / 2.0 if plan.two_tailed else plan.alpha
    gap = plan.p1 - plan.p2
    return normal_inv_cdf(1.0 - alpha) * pooled / (gap * gap)


def sample_size_curve(p1_values, gap: float, alphas, agreement="independent"):
    """Required N over a grid of p1 values, with p2 = p1 - gap.

    ``agreement`` is either "independent" (d = p1*p2) or a fixed d value.
    Returns a list of (p1, alpha, N) rows, alpha-major then p1 order.
    """
    if gap <= 0:
        raise ValueError("gap must be positive")
    rows = []
    for alpha in alphas:
        for p1 in p1_values:
            p2 = p1 - gap
            if agreement == "independent":
                d = p1 * p2
            else:
                d = float(agreement)
            plan = McNemarPlan(p1=float(p1), p2=p2, d_agree=d, alpha=float(alpha))
            rows.append((float(p1), float(alpha), mcnemar_sample_size(plan)))
    return rows
