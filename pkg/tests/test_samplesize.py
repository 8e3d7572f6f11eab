"""Sample-size formulas and their quantile kernels.

The quantile kernels are checked against brute-force oracles: the CDFs are
re-derived by Simpson integration of the densities and inverted by
bisection, independently of the incomplete-gamma/erf implementations.
"""

import math

import numpy as np
import pytest

from widefs.samplesize import (
    McNemarPlan,
    SmoothedPlan,
    chi2_cdf,
    chi2_inv_cdf,
    mcnemar_sample_size,
    normal_inv_cdf,
    sample_size_curve,
    smoothed_sample_size,
)


def simpson(f, a, b, n=4000):
    xs = np.linspace(a, b, n + 1)
    ys = np.array([f(x) for x in xs])
    h = (b - a) / n
    return h / 3 * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum() + 2 * ys[2:-1:2].sum())


def chi2_cdf_oracle(x, dof):
    """Integrate the chi-squared density; dof=1 via the substitution t=u^2,
    which removes the endpoint singularity."""
    if x <= 0:
        return 0.0
    if dof == 1:
        return simpson(lambda u: 2 * math.exp(-u * u / 2) / math.sqrt(2 * math.pi), 0, math.sqrt(x))
    c = 2 ** (dof / 2) * math.gamma(dof / 2)
    return simpson(lambda t: t ** (dof / 2 - 1) * math.exp(-t / 2) / c, 0, x)


def invert(cdf, q, lo, hi):
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if cdf(mid) < q:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestQuantileKernels:
    def test_chi2_095_dof1_vs_oracle(self):
        oracle = invert(lambda x: chi2_cdf_oracle(x, 1), 0.95, 0.0, 50.0)
        assert abs(chi2_inv_cdf(0.95, 1) - 3.8415) < 1e-3
        assert abs(chi2_inv_cdf(0.95, 1) - oracle) < 1e-6

    def test_chi2_099_dof1_vs_oracle(self):
        oracle = invert(lambda x: chi2_cdf_oracle(x, 1), 0.99, 0.0, 50.0)
        assert abs(chi2_inv_cdf(0.99, 1) - 6.6349) < 1e-3
        assert abs(chi2_inv_cdf(0.99, 1) - oracle) < 1e-6

    def test_chi2_dof2_closed_form(self):
        assert abs(chi2_inv_cdf(0.5, 2) - 2 * math.log(2)) < 1e-9

    @pytest.mark.parametrize("dof", [1, 2, 5, 11])
    @pytest.mark.parametrize("q", [0.1, 0.5, 0.9, 0.99])
    def test_chi2_roundtrip_vs_integration(self, dof, q):
        x = chi2_inv_cdf(q, dof)
        assert abs(chi2_cdf_oracle(x, dof) - q) < 1e-6

    def test_normal_quantile_vs_oracle(self):
        cdf = lambda x: 0.5 + simpson(
            lambda t: math.exp(-t * t / 2) / math.sqrt(2 * math.pi), 0, x
        ) * (1 if x >= 0 else -1)
        oracle = invert(lambda x: cdf(x) if x >= 0 else 1 - cdf(-x), 0.95, -10, 10)
        assert abs(normal_inv_cdf(0.95) - 1.6449) < 1e-3
        assert abs(normal_inv_cdf(0.95) - oracle) < 1e-6

    def test_normal_symmetry(self):
        assert normal_inv_cdf(0.5) == pytest.approx(0.0, abs=1e-9)
        for q in (0.6, 0.75, 0.9, 0.99):
            assert normal_inv_cdf(q) == pytest.approx(-normal_inv_cdf(1 - q), abs=1e-9)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            chi2_inv_cdf(0.0, 1)
        with pytest.raises(ValueError):
            chi2_inv_cdf(1.0, 1)
        with pytest.raises(ValueError):
            normal_inv_cdf(-0.2)


class TestMcNemarSampleSize:
    def test_worked_example_independent(self):
        n = mcnemar_sample_size(McNemarPlan(0.85, 0.80, 0.68, 0.05))
        assert n == pytest.approx(445.6, abs=0.5)

    def test_worked_example_max_agreement(self):
        n = mcnemar_sample_size(McNemarPlan(0.85, 0.80, 0.80, 0.05))
        assert n == pytest.approx(77, abs=1)

    def test_hand_computed(self):
        n = mcnemar_sample_size(McNemarPlan(0.9, 0.7, 0.63, 0.05))
        assert n == pytest.approx(3.8415 * 0.34 / 0.04, abs=0.1)

    def test_monotone_decreasing_in_agreement(self):
        values = [
            mcnemar_sample_size(McNemarPlan(0.85, 0.80, d, 0.05))
            for d in (0.66, 0.70, 0.74, 0.78, 0.80)
        ]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_inverse_square_gap_scaling(self):
        # same numerator p1+p2-2d, doubled gap -> exactly a quarter of N
        n1 = mcnemar_sample_size(McNemarPlan(0.80, 0.70, 0.60, 0.05))
        n2 = mcnemar_sample_size(McNemarPlan(0.85, 0.65, 0.60, 0.05))
        assert n2 == pytest.approx(n1 / 4, rel=1e-12)

    def test_plugging_back_reproduces_critical_value(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            p2 = rng.uniform(0.3, 0.9)
            p1 = rng.uniform(p2 + 0.01, 0.99)
            lo, hi = max(0.0, p1 + p2 - 1.0), p2
            d = rng.uniform(lo, hi)
            alpha = rng.uniform(0.005, 0.2)
            plan = McNemarPlan(p1, p2, d, alpha)
            n = mcnemar_sample_size(plan)
            stat = n * (p1 - p2) ** 2 / (p1 + p2 - 2 * d)
            assert abs(chi2_cdf(stat, 1) - (1 - alpha)) < 1e-6

    def test_cell_probabilities(self):
        plan = McNemarPlan(0.85, 0.80, 0.68, 0.05)
        neither, first, second, both = plan.cell_probabilities()
        assert both == pytest.approx(0.68)
        assert first == pytest.approx(0.17)
        assert second == pytest.approx(0.12)
        assert neither + first + second + both == pytest.approx(1.0)
        assert sum(plan.cell_counts(200)) == pytest.approx(200.0)

    def test_invalid_plans(self):
        with pytest.raises(ValueError, match="no detectable difference"):
            McNemarPlan(0.8, 0.8, 0.6, 0.05)
        with pytest.raises(ValueError):
            McNemarPlan(0.7, 0.8, 0.6, 0.05)
        with pytest.raises(ValueError):
            McNemarPlan(0.85, 0.80, 0.82, 0.05)  # d > min(p1, p2)
        with pytest.raises(ValueError):
            McNemarPlan(0.9, 0.8, 0.6, 0.05)  # d < p1 + p2 - 1
        with pytest.raises(ValueError):
            McNemarPlan(0.85, 0.8, 0.68, 0.0)


class TestSmoothedSampleSize:
    def test_hand_computed(self):
        plan = SmoothedPlan(0.85, 0.80, 0.04, 0.04, cov=0.0, alpha=0.05)
        assert smoothed_sample_size(plan) == pytest.approx(52.6, abs=0.2)

    def test_perfect_covariance_needs_no_sample(self):
        plan = SmoothedPlan(0.85, 0.80, 0.04, 0.04, cov=0.04)
        assert smoothed_sample_size(plan) == 0.0

    def test_two_tailed_needs_more(self):
        one = smoothed_sample_size(SmoothedPlan(0.85, 0.80, 0.04, 0.04))
        two = smoothed_sample_size(SmoothedPlan(0.85, 0.80, 0.04, 0.04, two_tailed=True))
        assert two > one

    def test_invalid_plans(self):
        with pytest.raises(ValueError):
            SmoothedPlan(0.8, 0.85, 0.04, 0.04)
        with pytest.raises(ValueError):
            SmoothedPlan(0.85, 0.8, 0.04, 0.04, cov=0.1)


class TestSampleSizeCurve:
    def test_paper_point_on_curve(self):
        rows = sample_size_curve([0.85], 0.05, [0.05])
        assert rows[0][2] == pytest.approx(445.6, abs=0.5)

    def test_strictly_decreasing_and_alpha_dominance(self):
        p1s = np.arange(0.55, 0.9501, 0.01)
        rows = sample_size_curve(p1s, 0.05, [0.05, 0.01])
        by_alpha = {}
        for p1, alpha, n in rows:
            by_alpha.setdefault(alpha, []).append(n)
        for alpha, ns in by_alpha.items():
            assert all(a > b for a, b in zip(ns, ns[1:])), f"not decreasing at alpha={alpha}"
        assert all(b > a for a, b in zip(by_alpha[0.05], by_alpha[0.01]))

    def test_custom_agreement(self):
        rows = sample_size_curve([0.85], 0.05, [0.05], agreement=0.68)
        assert rows[0][2] == pytest.approx(445.6, abs=0.5)
