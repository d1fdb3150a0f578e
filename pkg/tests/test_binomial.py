"""Bound machinery against frozen oracle values and exactness properties.

The frozen literals were computed through independent routes (rational
arithmetic for pmfs, beta quantiles for the exact bounds, a reference
normal ppf) and pasted here as constants.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guaranteesim.binomial import (
    LowerBoundProcedure,
    binom_pmf,
    binom_pmf_vector,
    binom_survival,
    clopper_pearson_lower,
    clopper_pearson_lower_vector,
    coverage_report,
    exact_lower_coverage,
    exceedance_prob,
    normal_cdf,
    normal_quantile,
    probability_grid,
    refined_grid_max,
    sup_false_positive,
    wald_lower,
    wald_lower_vector,
)

# rational-arithmetic oracles
PMF_300_HALF_150 = 0.04602751441903444
PMF_20_03_7 = 0.1642619852172365

# reference normal quantiles
Z_95 = 1.6448536269514722
Z_975 = 1.959963984540054
Z_99 = 2.3263478740408408
Z_80 = 0.8416212335729143

# beta-quantile oracles for the exact lower bound
CP_150_300_05 = 0.45100875470879354
CP_10_40_10 = 0.16151186884459268
CP_1_300_05 = 0.00017096303211345718
CP_299_300_025 = 0.9815687479519322
CP_300_300_05 = 0.9900639180555423  # 0.05 ** (1/300)

WALD_165_300_05 = 0.5027551764779599
# exceedance of the Wald rule at the grid witness nearest 1/2
WALD_FP_WITNESS_P = 0.49951171875
WALD_FP_AT_WITNESS = 0.045316196027871215
WALD_MIN_COVERAGE = 0.2540613302937401
WALD_WORST_P = 0.9990234375


class TestPmf:
    def test_frozen_values(self):
        assert binom_pmf(300, 0.5, 150) == pytest.approx(PMF_300_HALF_150, abs=1e-12)
        assert binom_pmf(20, 0.3, 7) == pytest.approx(PMF_20_03_7, abs=1e-12)

    def test_degenerate_rates(self):
        assert binom_pmf(10, 0.0, 0) == 1.0
        assert binom_pmf(10, 0.0, 3) == 0.0
        assert binom_pmf(10, 1.0, 10) == 1.0
        v = binom_pmf_vector(7, 1.0)
        assert v[7] == 1.0 and v[:7].sum() == 0.0

    @given(n=st.integers(1, 200), p=st.floats(0.0, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_vector_sums_to_one(self, n, p):
        assert binom_pmf_vector(n, p).sum() == pytest.approx(1.0, abs=1e-9)

    @given(n=st.integers(1, 60), p=st.floats(0.01, 0.99), x=st.data())
    @settings(max_examples=40, deadline=None)
    def test_scalar_matches_vector(self, n, p, x):
        k = x.draw(st.integers(0, n))
        assert binom_pmf(n, p, k) == pytest.approx(
            float(binom_pmf_vector(n, p)[k]), rel=1e-12)

    def test_survival_edges(self):
        assert binom_survival(0, 12, 0.3) == 1.0
        assert binom_survival(-2, 12, 0.3) == 1.0
        assert binom_survival(13, 12, 0.3) == 0.0

    def test_rejects_bad_args(self):
        with pytest.raises(ValueError):
            binom_pmf(0, 0.5, 0)
        with pytest.raises(ValueError):
            binom_pmf(5, 1.5, 2)
        with pytest.raises(ValueError):
            binom_pmf(5, 0.5, 9)


class TestNormalQuantile:
    @pytest.mark.parametrize("q,z", [(0.95, Z_95), (0.975, Z_975),
                                     (0.99, Z_99), (0.8, Z_80), (0.5, 0.0)])
    def test_frozen_values(self, q, z):
        assert normal_quantile(q) == pytest.approx(z, abs=1e-9)

    @given(q=st.floats(1e-6, 1.0 - 1e-6))
    @settings(max_examples=200, deadline=None)
    def test_roundtrip_through_cdf(self, q):
        assert abs(normal_cdf(normal_quantile(q)) - q) <= 1e-9

    @given(q=st.floats(1e-6, 0.5))
    @settings(max_examples=60, deadline=None)
    def test_symmetry(self, q):
        assert normal_quantile(q) == pytest.approx(-normal_quantile(1.0 - q),
                                                   abs=1e-9)

    def test_domain(self):
        for q in (0.0, 1.0, -0.1, 1.1):
            with pytest.raises(ValueError):
                normal_quantile(q)


class TestClopperPearson:
    def test_frozen_values(self):
        assert clopper_pearson_lower(150, 300, 0.05) == pytest.approx(
            CP_150_300_05, abs=1e-9)
        assert clopper_pearson_lower(10, 40, 0.1) == pytest.approx(
            CP_10_40_10, abs=1e-9)
        assert clopper_pearson_lower(1, 300, 0.05) == pytest.approx(
            CP_1_300_05, abs=1e-9)
        assert clopper_pearson_lower(299, 300, 0.025) == pytest.approx(
            CP_299_300_025, abs=1e-9)

    def test_boundary_counts(self):
        assert clopper_pearson_lower(0, 300, 0.05) == 0.0
        # x = n has the closed form alpha^(1/n)
        assert clopper_pearson_lower(300, 300, 0.05) == pytest.approx(
            CP_300_300_05, abs=1e-9)

    def test_vector_matches_scalar(self):
        vec = clopper_pearson_lower_vector(40, 0.1)
        for x in range(41):
            assert vec[x] == pytest.approx(clopper_pearson_lower(x, 40, 0.1),
                                           abs=1e-12)

    def test_defining_equation(self):
        # the bound solves Pr(X >= x | p) = alpha'
        for x, n, a in ((10, 40, 0.1), (150, 300, 0.05)):
            p = clopper_pearson_lower(x, n, a)
            assert binom_survival(x, n, p) == pytest.approx(a, abs=1e-7)

    @given(n=st.integers(2, 80), a=st.floats(0.01, 0.2))
    @settings(max_examples=30, deadline=None)
    def test_monotone_in_x(self, n, a):
        vec = clopper_pearson_lower_vector(n, a)
        assert (np.diff(vec) > 0.0).all()
        assert (vec <= np.arange(n + 1) / n + 1e-12).all()


class TestWald:
    def test_frozen_value(self):
        assert wald_lower(165, 300, 0.05) == pytest.approx(WALD_165_300_05,
                                                           abs=1e-9)

    def test_degenerate_counts_have_zero_width(self):
        assert wald_lower(0, 50, 0.05) == 0.0
        assert wald_lower(50, 50, 0.05) == 1.0

    @given(n=st.integers(2, 200), a=st.floats(0.01, 0.2))
    @settings(max_examples=30, deadline=None)
    def test_vector_in_unit_interval(self, n, a):
        vec = wald_lower_vector(n, a)
        assert (vec >= 0.0).all() and (vec <= 1.0).all()
        assert vec[0] == pytest.approx(wald_lower(0, n, a), abs=1e-12)


class TestCoverage:
    def test_pair_sums_to_one_exactly(self):
        proc = LowerBoundProcedure("clopper_pearson", 0.05, 40)
        for p in (0.1, 0.37, 0.5, 0.93):
            cov = exact_lower_coverage(proc, p)
            # threshold = p makes these complementary by construction
            assert cov + exceedance_prob(proc, p, p) == 1.0

    def test_cp_exact_coverage_floor(self):
        proc = LowerBoundProcedure("clopper_pearson", 0.1, 40)
        for p in probability_grid(64, open_ends=True):
            assert exact_lower_coverage(proc, p) >= 0.9 - 1e-9

    def test_wald_witness_frozen(self):
        proc = LowerBoundProcedure("wald", 0.05, 300)
        rep = coverage_report(proc, probability_grid(1024, open_ends=True))
        assert rep.min_coverage == pytest.approx(WALD_MIN_COVERAGE, abs=1e-9)
        assert rep.worst_p == pytest.approx(WALD_WORST_P, abs=1e-12)
        assert rep.min_coverage < 0.95

    def test_wald_fp_witness_frozen(self):
        proc = LowerBoundProcedure("wald", 0.05, 300)
        at_witness = exceedance_prob(proc, WALD_FP_WITNESS_P, 0.5)
        assert at_witness == pytest.approx(WALD_FP_AT_WITNESS, abs=1e-9)
        # the sup search must do at least as well as the frozen witness
        assert sup_false_positive(proc, 0.5) >= WALD_FP_AT_WITNESS - 1e-12

    def test_cp_sup_respects_nominal(self):
        proc = LowerBoundProcedure("clopper_pearson", 0.05, 300)
        assert sup_false_positive(proc, 0.5) <= 0.05 + 1e-12

    def test_sup_rejects_grid_at_threshold(self):
        proc = LowerBoundProcedure("clopper_pearson", 0.05, 40)
        with pytest.raises(ValueError):
            sup_false_positive(proc, 0.5, grid=[0.2, 0.5])


class TestGrids:
    def test_open_ends(self):
        g = probability_grid(8, open_ends=True)
        assert g[0] == 0.125 and g[-1] == 0.875 and len(g) == 7

    def test_closed_window(self):
        g = probability_grid(8, lo=0.25, hi=0.75, open_ends=False)
        assert g[0] == 0.25 and g[-1] == 0.75

    def test_refinement_tightens_argmax(self):
        peak = 0.3337
        fn = lambda p: -(p - peak) ** 2
        base = probability_grid(16, open_ends=True)
        _, argmax = refined_grid_max(fn, base, 8192, 0.0, 1.0)
        assert abs(argmax - peak) <= 1.0 / 8192

    def test_refinement_never_worse_than_base(self):
        fn = lambda p: math.sin(17.0 * p)
        base = probability_grid(32, open_ends=True)
        coarse = max(fn(p) for p in base)
        refined, _ = refined_grid_max(fn, base, 4096, 0.0, 1.0)
        assert refined >= coarse
