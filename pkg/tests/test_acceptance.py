"""Acceptance gate: every anchored quantity at its stated tolerance.

`pytest -v tests/test_acceptance.py` prints one pass/fail line per
criterion. Criterion 3 has two clauses: 3a checks the calibrated
conditioning variant against its reference band at the 0.05 level, and
3b states a ceiling at the 0.025 level that the same variant does not
attain. 3b stays red on purpose; loosening it would hide a real gap
between the calibrated model and that ceiling. The `guaranteesim
reproduce` subcommand reports the same table outside pytest.
"""

import time

import numpy as np
import pytest

from guaranteesim.binomial import LowerBoundProcedure, coverage_report, \
    probability_grid
from guaranteesim.economics import BenefitFunction, CostSchedule, \
    PolicyEconomics
from guaranteesim.reproduce import evaluate_anchors
from guaranteesim.strategies import MixtureBelief, fraud_mixture_fp, \
    mixture_fp_at

SUP_FIXED_05 = 0.2188865524359944
WALD_MIN_COVERAGE = 0.2540613302937401


@pytest.fixture(scope="module")
def anchors():
    rows, cal = evaluate_anchors()
    return {row.ident: row for row in rows}, cal


def econ_1000():
    return PolicyEconomics(CostSchedule.linear(1.0, 1000),
                           BenefitFunction.linear(10.0))


def show(row):
    status = "PASS" if row.passed else "FAIL"
    print(f"[{status}] criterion {row.ident}: {row.name}; "
          f"target {row.target}; computed {row.computed} "
          f"(tolerance {row.tolerance})")


def test_criterion_01(anchors):
    rows, _ = anchors
    show(rows["1"])
    assert fraud_mixture_fp(0.01, 0.25) == pytest.approx(0.13375, abs=1e-12)
    for a in np.linspace(0.001, 0.5, 41):
        assert fraud_mixture_fp(a, 0.25) == pytest.approx(
            0.875 * a + 0.125, abs=1e-12)
    assert rows["1"].passed


def test_criterion_02(anchors):
    rows, _ = anchors
    show(rows["2"])
    assert econ_1000().max_scale_under_bound(0.13375, -50.0) == 373
    assert rows["2"].passed


def test_criterion_03a(anchors):
    rows, cal = anchors
    show(rows["3a"])
    assert cal.variant == "fixed_given_published"
    assert cal.value == pytest.approx(SUP_FIXED_05, abs=1e-9)
    assert 0.17 <= cal.value <= 0.27
    assert cal.residual < 0.0012
    # runtime guard: a 20-level by 100-point sweep must stay desk-scale
    belief = MixtureBelief(0.5, cal.variant)
    start = time.perf_counter()
    for alpha in np.linspace(0.01, 0.2, 20):
        for p in np.linspace(0.0025, 0.4975, 100):
            mixture_fp_at(p, 0.5, 300, float(alpha), belief)
    elapsed = time.perf_counter() - start
    print(f"sweep of 2000 exact evaluations took {elapsed:.2f}s")
    assert elapsed < 300.0
    assert rows["3a"].passed


def test_criterion_03b(anchors):
    rows, _ = anchors
    show(rows["3b"])
    # red by design: the variant that matches the 0.22 reference exceeds
    # this ceiling at the stricter level (computed ~0.196 > 0.07)
    assert rows["3b"].passed


def test_criterion_04(anchors):
    rows, _ = anchors
    show(rows["4"])
    econ = econ_1000()
    m = econ.max_scale_under_bound(0.22, -0.05 * econ.cost(1000))
    assert m == 227
    assert econ.cost(m) <= 0.2273 * econ.cost(1000)
    assert rows["4"].passed


def test_criterion_05(anchors):
    rows, _ = anchors
    show(rows["5"])
    grid = probability_grid(1024, open_ends=True)
    wald = coverage_report(LowerBoundProcedure("wald", 0.05, 300), grid)
    assert wald.min_coverage == pytest.approx(WALD_MIN_COVERAGE, abs=1e-9)
    assert wald.min_coverage < 0.95
    assert rows["5"].passed


def test_criterion_06(anchors):
    rows, _ = anchors
    show(rows["6"])
    assert rows["6"].passed


def test_criterion_07(anchors):
    rows, _ = anchors
    show(rows["7"])
    assert rows["7"].passed


def test_criterion_08(anchors):
    rows, _ = anchors
    show(rows["8"])
    assert rows["8"].passed


def test_criterion_09(anchors):
    rows, _ = anchors
    show(rows["9"])
    assert rows["9"].passed


def test_criterion_10(anchors, tmp_path, capsys):
    rows, _ = anchors
    show(rows["10"])
    from guaranteesim.cli import main
    for sub in ("a", "b"):
        rc = main(["coverage", "--proc", "wald", "--n", "40",
                   "--out", str(tmp_path / sub)])
        assert rc == 0
    capsys.readouterr()
    first = (tmp_path / "a" / "coverage_wald_n40_a0.05.csv").read_bytes()
    second = (tmp_path / "b" / "coverage_wald_n40_a0.05.csv").read_bytes()
    assert first == second
    assert rows["10"].passed
