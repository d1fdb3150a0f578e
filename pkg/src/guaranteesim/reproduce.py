"""Anchor reproduction: the package's documented reference numbers.

Each anchor pins a quantity the library must reproduce, from closed-form
identities through exact-enumeration values to Monte-Carlo agreement.
The CLI `reproduce` subcommand prints the table; the test suite asserts
the same targets independently. Anchor 3b is expected to fail: the
conditioning variant calibrated to reproduce the 0.22 anchor yields
about 0.196 at the 97.5% nominal level, and no implemented conditioning
satisfies both anchors at once. It stays in the table, red, rather than
being retuned.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .binomial import (
    LowerBoundProcedure,
    exact_lower_coverage,
    probability_grid,
)
from .contracts import (
    FullGuarantee,
    ProportionalGuarantee,
    TailGuarantee,
    implementer_payoff,
    minimal_insurance,
)
from .decisions import ImplementerPolicy, decide_with_contract
from .economics import BenefitFunction, CostSchedule, PolicyEconomics
from .researcher import (
    ImplValue,
    NoHedge,
    PoolMember,
    ResearcherPayoffModel,
    TailOnlyGuarantee,
    UtilitySpec,
    expected_utility,
    participation_check,
    pool_expected_utility,
    researcher_world,
)
from .simulate import DiscreteDist, SeededStream, enumerate_outcomes, mc_estimate
from .strategies import (
    FraudulentStrategy,
    MixtureBelief,
    SelectiveStrategy,
    TruthfulStrategy,
    _rct_tables,
    calibrate_conditioning,
    fraud_mixture_fp,
    mixture_actual_fp,
    rct_publish_and_clear_prob,
    rct_reject_prob,
)

__all__ = ["AnchorRow", "evaluate_anchors"]


@dataclass(frozen=True)
class AnchorRow:
    ident: str
    name: str
    target: str
    computed: str
    tolerance: str
    passed: bool


def _row(ident, name, target, computed, tolerance, passed) -> AnchorRow:
    return AnchorRow(ident=ident, name=name, target=target,
                     computed=computed, tolerance=tolerance, passed=bool(passed))


def evaluate_anchors(seed: int = 20260819, sup_base_denom: int = 512,
                     sup_refine_denom: int = 8192,
                     coverage_denom: int = 1024):
    """Run every anchor; returns (rows, calibration result)."""
    rows = []

    # 1: mixture closed form
    val = fraud_mixture_fp(0.01, 0.25)
    worst = max(abs(fraud_mixture_fp(a, 0.25) - (0.875 * a + 0.125))
                for a in np.linspace(0.001, 0.5, 41))
    rows.append(_row(
        "1", "mixture closed form at weight 0.25", "0.13375 and 0.875a'+0.125",
        f"{val:.10f}, max identity gap {worst:.2e}",
        "1e-12", abs(val - 0.13375) <= 1e-12 and worst <= 1e-12))

    # 2: scale-back under the mixture rate
    econ_1000 = PolicyEconomics(CostSchedule.linear(1.0, 1000),
                                BenefitFunction.linear(10.0))
    m_back = econ_1000.max_scale_under_bound(0.13375, -50.0)
    rows.append(_row(
        "2", "scale-back at alpha=0.13375, floor -0.05*c_M", "373",
        str(m_back), "exact integer", m_back == 373))

    # 3: calibrated conditioning reproduces the 0.22 anchor...
    cal = calibrate_conditioning(
        p_control=0.5, n=300, pi=0.5, alpha_prime=0.05, target=0.22,
        base_denom=sup_base_denom, refine_denom=sup_refine_denom)
    rows.append(_row(
        "3a", f"actual rate at nominal 0.05 ({cal.variant})",
        "within [0.17, 0.27]", f"{cal.value:.6f} (residual {cal.residual:.4f})",
        "0.05", 0.17 <= cal.value <= 0.27))
    # ...and the stricter-level anchor, which the same variant cannot meet
    strict = mixture_actual_fp(
        0.025, 0.5, 300, MixtureBelief(0.5, cal.variant),
        base_denom=sup_base_denom, refine_denom=sup_refine_denom)
    rows.append(_row(
        "3b", f"actual rate at nominal 0.025 ({cal.variant})",
        "<= 0.07", f"{strict:.6f}", "0.02 over 0.05", strict <= 0.07))

    # 4: decision scale under the 0.22 rate
    m_sel = econ_1000.max_scale_under_bound(0.22, -0.05 * econ_1000.cost(1000))
    ratio = econ_1000.cost(m_sel) / econ_1000.cost(1000) if m_sel else 0.0
    rows.append(_row(
        "4", "scale cost ratio at alpha=0.22, floor -0.05*c_M",
        "c_m <= 0.2273*c_M", f"m={m_sel}, ratio {ratio:.4f}",
        "exact arithmetic", m_sel > 0 and ratio <= 0.2273))

    # 5: coverage properties at n=300
    cov_grid = probability_grid(coverage_denom, open_ends=True)
    cp_ok = True
    cp_worst = 1.0
    for alpha in (0.2, 0.1, 0.05, 0.025, 0.01):
        proc = LowerBoundProcedure("clopper_pearson", alpha, 300)
        margin = min(exact_lower_coverage(proc, p) - (1.0 - alpha)
                     for p in cov_grid)
        cp_worst = min(cp_worst, margin)
        cp_ok = cp_ok and margin >= -1e-9
    wald_proc = LowerBoundProcedure("wald", 0.05, 300)
    wald_min = min(exact_lower_coverage(wald_proc, p) for p in cov_grid)
    rows.append(_row(
        "5", "exact coverage floor and approximate-bound witness",
        "CP margin >= 0; Wald witness < 0.95",
        f"CP min margin {cp_worst:.2e}; Wald min coverage {wald_min:.4f}",
        "1e-9", cp_ok and wald_min < 0.95))

    # 6: contract payoff floors at M=20 by full enumeration
    econ_20 = PolicyEconomics(CostSchedule.linear(1.0, 20),
                              BenefitFunction.linear(2.5))
    alpha_prime = 0.05
    floored = [
        (FullGuarantee(), 0.0),
        (TailGuarantee(-5.0), -5.0),
        (ProportionalGuarantee(1.0 - alpha_prime),
         -econ_20.cost(20) * alpha_prime),
    ]
    worst_gap = float("inf")
    ok6 = True
    for contract, floor in floored:
        for p in (0.0, 0.1, 0.5, 0.9):
            exp = enumerate_outcomes(
                20, econ_20.success_rate(p),
                lambda xs, c=contract: implementer_payoff(
                    econ_20.net_outcome(20, xs), c))
            worst_gap = min(worst_gap, exp - floor)
            ok6 = ok6 and exp >= floor - 1e-9
    rows.append(_row(
        "6", "contract payoff floors at M=20",
        "E[payoff] >= floor per contract", f"min slack {worst_gap:.3e}",
        "1e-9", ok6))

    # 7: expected-value bound across the strategy suite, small instances
    ok7, worst7 = _strategy_suite_bound()
    rows.append(_row(
        "7", "worst-case expected value bound, strategy suite",
        "E[value] >= -c_m * sup Pr", f"min slack {worst7:.3e}", "1e-9", ok7))

    # 8: researcher-side properties on the bundled instance
    ok8, detail8 = _researcher_side_properties(econ_20)
    rows.append(_row(
        "8", "concavity gap, minimal guarantee acceptance, tail floor lift",
        "strict Jensen; acceptance at scale; lift >= 0", detail8,
        "exact / 1e-12", ok8))

    # 9: pooling raises expected utility and certainty equivalent
    ok9, detail9 = _pooling_properties()
    rows.append(_row(
        "9", "risk pooling at J=2 and J=5", "pooled EU >= standalone, CE rising",
        detail9, "1e-12", ok9))

    # 10: Monte-Carlo agreement and byte-stable reruns
    ok10, detail10 = _infrastructure_properties(seed, econ_20)
    rows.append(_row(
        "10", "Monte-Carlo agreement and determinism",
        "five quantities within 4 SE; reruns byte-identical", detail10,
        "4 standard errors", ok10))

    return rows, cal


def _strategy_suite_bound():
    """Implementer's E[value] against the -c_m * sup bound, every strategy."""
    econ = PolicyEconomics(CostSchedule.linear(1.0, 5),
                           BenefitFunction.linear(2.5))
    p0 = econ.break_even_success_rate()  # 0.4 for these numbers
    n = 12
    alpha = 0.1
    cp = TruthfulStrategy(LowerBoundProcedure("clopper_pearson", alpha, n))
    wald = TruthfulStrategy(LowerBoundProcedure("wald", alpha, n))
    fraud = FraudulentStrategy(LowerBoundProcedure("clopper_pearson", alpha, n),
                               guess_spread=0.05)
    sel = SelectiveStrategy(n=n, alpha_prime=alpha)
    exceedance_fns = (
        lambda p: cp.exceedance_prob(p, p0),
        lambda p: wald.exceedance_prob(p, p0),
        lambda p: fraud.exceedance_prob(p, p0),
        lambda p: sel.exceedance_prob(p, p0, p0),
    )
    grid = probability_grid(64, lo=0.0, hi=p0)
    ok = True
    worst = float("inf")
    for fn in exceedance_fns:
        sup = max(fn(p) for p in grid)
        for m in (1, 3, 5):
            floor = -econ.cost(m) * sup
            for p in grid:
                value = fn(p) * econ.expected_net(m, p)
                worst = min(worst, value - floor)
                ok = ok and value >= floor - 1e-9
    return ok, worst


def _researcher_side_properties(econ_20: PolicyEconomics):
    utility = UtilitySpec("cara", risk_aversion=0.05, v_bar=-6.0)
    payoff = ResearcherPayoffModel(base_pub=2.0,
                                   impl_value=ImplValue("constant", 2.0))
    world = researcher_world(NoHedge(), payoff, 20, econ_20, 0.5)
    jensen_gap = utility.value(world.mean()) - expected_utility(world, utility)
    jensen_ok = jensen_gap > 1e-9

    u_bar = -12.0
    mi = minimal_insurance(u_bar, econ_20.cost(20))
    # belief of 1 keeps the proportional acceptance distribution-free
    policy = ImplementerPolicy(u_bar=u_bar, alpha_belief=1.0, p0=0.4)
    d_tail = decide_with_contract(0.5, TailGuarantee(mi.k), policy, econ_20)
    d_prop = decide_with_contract(0.5, ProportionalGuarantee(mi.s), policy,
                                  econ_20)
    accept_ok = (d_tail.implement and d_tail.scale == 20
                 and d_prop.implement and d_prop.scale == 20)

    proc = LowerBoundProcedure("clopper_pearson", 0.05, 40)
    strat = TruthfulStrategy(proc)
    grid = np.linspace(0.05, 0.95, 19)

    def pub(p):
        return strat.exceedance_prob(p, 0.4)

    base_min = participation_check(pub, NoHedge(), payoff, utility, econ_20,
                                   20, grid).minimum
    tail_min = participation_check(pub, TailOnlyGuarantee(u_bar), payoff,
                                   utility, econ_20, 20, grid).minimum
    lift = tail_min - base_min
    lift_ok = lift >= -1e-12
    detail = (f"Jensen gap {jensen_gap:.4f}; tail scale {d_tail.scale}, "
              f"prop scale {d_prop.scale}; floor lift {lift:.4f}")
    return jensen_ok and accept_ok and lift_ok, detail


def _pooling_properties():
    utility = UtilitySpec("cara", risk_aversion=0.1)
    loss = DiscreteDist([0.0, -10.0], [0.7, 0.3])
    standalone = float(pool_expected_utility(
        [PoolMember(0.0, loss, utility)], np.array([[1.0]]))[0])
    ce = {1: utility.certainty_equivalent(standalone)}
    ok = True
    for j in (2, 5):
        members = [PoolMember(0.0, loss, utility) for _ in range(j)]
        shares = np.full((j, j), 1.0 / j)
        eus = pool_expected_utility(members, shares)
        ok = ok and bool((eus >= standalone - 1e-12).all())
        ce[j] = utility.certainty_equivalent(float(eus[0]))
    ok = ok and ce[2] >= ce[1] - 1e-12 and ce[5] >= ce[2] - 1e-12
    detail = (f"EU standalone {standalone:.5f}; CE J=1 {ce[1]:.4f}, "
              f"J=2 {ce[2]:.4f}, J=5 {ce[5]:.4f}")
    return ok, detail


def _infrastructure_properties(seed: int, econ_20: PolicyEconomics):
    checks = []

    exact1 = 20 * 0.3
    est1 = mc_estimate(lambda rng, k: rng.binomial(20, 0.3, size=k).astype(float),
                       1_000_000, SeededStream(seed, 101))
    checks.append((exact1, est1))

    n, a = 40, 0.1
    reject, wald = _rct_tables(n, a)
    exact2 = rct_reject_prob(0.45, 0.5, n, a)

    def sample_reject(rng, k):
        xc = rng.binomial(n, 0.5, size=k)
        xt = rng.binomial(n, 0.45, size=k)
        return reject[xc, xt].astype(float)

    est2 = mc_estimate(sample_reject, 1_000_000, SeededStream(seed, 102))
    checks.append((exact2, est2))

    exact3 = rct_publish_and_clear_prob(0.45, 0.5, n, a)

    def sample_clear(rng, k):
        xc = rng.binomial(n, 0.5, size=k)
        xt = rng.binomial(n, 0.45, size=k)
        return (reject[xc, xt] & (wald[xt] > 0.5)).astype(float)

    est3 = mc_estimate(sample_clear, 1_000_000, SeededStream(seed, 103))
    checks.append((exact3, est3))

    fraud = FraudulentStrategy(LowerBoundProcedure("clopper_pearson", 0.05, 40),
                               guess_spread=0.05)
    exact4 = fraud.exceedance_prob(0.3, 0.4)

    def sample_fraud(rng, k):
        guesses = np.where(rng.random(k) < 0.5, 0.45, 0.35)
        xs = rng.binomial(40, 0.3, size=k)
        published = np.maximum(fraud.procedure.bounds[xs], guesses)
        return (published > 0.4).astype(float)

    est4 = mc_estimate(sample_fraud, 1_000_000, SeededStream(seed, 104))
    checks.append((exact4, est4))

    tail = TailGuarantee(-5.0)
    exact5 = enumerate_outcomes(
        20, 0.1, lambda xs: implementer_payoff(econ_20.net_outcome(20, xs), tail))

    def sample_tail(rng, k):
        xs = rng.binomial(20, 0.1, size=k)
        return implementer_payoff(econ_20.net_outcome(20, xs), tail)

    est5 = mc_estimate(sample_tail, 1_000_000, SeededStream(seed, 105))
    checks.append((exact5, est5))

    ok = True
    max_z = 0.0
    for exact, est in checks:
        z = abs(est.mean - exact) / est.std_error if est.std_error > 0 else 0.0
        max_z = max(max_z, z)
        ok = ok and z <= 4.0

    est1_again = mc_estimate(
        lambda rng, k: rng.binomial(20, 0.3, size=k).astype(float),
        1_000_000, SeededStream(seed, 101))
    byte_ok = est1_again == est1
    buf_a, buf_b = io.StringIO(), io.StringIO()
    for buf in (buf_a, buf_b):
        est = mc_estimate(sample_tail, 10_000, SeededStream(seed, 106))
        buf.write(f"mean,{est.mean:.12g}\nse,{est.std_error:.12g}\n")
    byte_ok = byte_ok and buf_a.getvalue() == buf_b.getvalue()

    detail = f"max |z| {max_z:.2f}; rerun identical: {byte_ok}"
    return ok and byte_ok, detail
