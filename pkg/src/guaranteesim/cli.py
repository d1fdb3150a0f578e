"""Command-line entry point.

One JSON scenario document drives every subcommand; flags override the
handful of values that vary per run. All file outputs are plain CSV or
JSON, written deterministically: identical config and seed give
byte-identical files. Output directory resolution: --out flag, then the
GUARANTEESIM_OUT environment variable, then ./out.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .binomial import LowerBoundProcedure, coverage_report, probability_grid
from .config import ConfigError, Scenario, load_scenario
from .contracts import (
    implementer_payoff,
    minimal_insurance,
    researcher_payment,
    ProportionalGuarantee,
    TailGuarantee,
)
from .decisions import decide_no_guarantee, decide_with_contract
from .economics import BenefitFunction, CostSchedule, PolicyEconomics
from .reproduce import evaluate_anchors
from .researcher import (
    expected_utility,
    no_implementation_world,
    participation_check,
    pool_expected_utility,
    publication_rate_conditions,
)
from .strategies import (
    FraudulentStrategy,
    MixtureBelief,
    SelectiveStrategy,
    TruthfulStrategy,
    actual_fp_curve,
    calibrate_conditioning,
    fraud_mixture_fp,
    mixture_fp_at,
)

__all__ = ["main"]


# ---------------------------------------------------------------------------
# Shared plumbing.

@lru_cache(maxsize=8)
def _calibration(base_denom: int, refine_denom: int):
    return calibrate_conditioning(base_denom=base_denom,
                                  refine_denom=refine_denom)


def _resolve_variant(scenario: Scenario) -> str:
    if scenario.belief_conditioning != "calibrated":
        return scenario.belief_conditioning
    grids = scenario.grids
    return _calibration(grids.sup_base_denom, grids.sup_refine_denom).variant


def _meta_lines(scenario: Scenario) -> list:
    grids = scenario.grids
    cal = _calibration(grids.sup_base_denom, grids.sup_refine_denom)
    return [
        f"# guaranteesim {__version__}",
        f"# seed={scenario.seed}",
        f"# grids: coverage_denom={grids.coverage_denom} "
        f"sup_base_denom={grids.sup_base_denom} "
        f"sup_refine_denom={grids.sup_refine_denom}",
        f"# fig1_variant={cal.variant}",
    ]


def _meta_dict(scenario: Scenario) -> dict:
    grids = scenario.grids
    cal = _calibration(grids.sup_base_denom, grids.sup_refine_denom)
    return {
        "tool": f"guaranteesim {__version__}",
        "seed": scenario.seed,
        "grids": {
            "coverage_denom": grids.coverage_denom,
            "sup_base_denom": grids.sup_base_denom,
            "sup_refine_denom": grids.sup_refine_denom,
        },
        "fig1_variant": cal.variant,
    }


def _write_csv(path: Path, meta: list, header: str, rows) -> None:
    lines = list(meta) + [header] + [",".join(row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _fmt(x: float) -> str:
    # repr is the shortest string that round-trips the exact double
    return repr(float(x))


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("GUARANTEESIM_OUT") or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _pub_prob_fn(scenario: Scenario, p0: float):
    strat = scenario.strategy
    if isinstance(strat, SelectiveStrategy):
        return lambda p: strat.exceedance_prob(p, p0, p0)
    if isinstance(strat, (TruthfulStrategy, FraudulentStrategy)):
        return lambda p: strat.exceedance_prob(p, p0)
    raise TypeError(f"unknown strategy {strat!r}")


# ---------------------------------------------------------------------------
# Subcommands.

def cmd_coverage(scenario: Scenario, args) -> int:
    kind = args.proc or scenario.procedure.kind
    n = args.n or scenario.procedure.n
    alpha = args.alpha_prime or scenario.procedure.nominal_alpha
    proc = LowerBoundProcedure(kind, alpha, n)
    grid = probability_grid(scenario.grids.coverage_denom, open_ends=True)
    report = coverage_report(proc, grid)
    out = _out_dir(args)
    path = out / f"coverage_{kind}_n{n}_a{alpha:g}.csv"
    rows = ([_fmt(p), _fmt(c), _fmt(v)] for p, c, v in
            zip(report.p_grid, report.coverage, report.violation))
    _write_csv(path, _meta_lines(scenario), "p,coverage,violation", rows)
    print(f"wrote {path}")
    print(f"min coverage {report.min_coverage:.6f} at p={report.worst_p:.6f} "
          f"(nominal {1.0 - alpha:.6f})")
    return 0


def cmd_example1(scenario: Scenario, args) -> int:
    value = fraud_mixture_fp(args.alpha_prime, args.pi)
    print(f"alpha_actual = {value:.5f}")
    econ = PolicyEconomics(CostSchedule.linear(1.0, 1000),
                           BenefitFunction.linear(10.0))
    u_bar = -0.05 * econ.cost(1000)
    m_star = econ.max_scale_under_bound(value, u_bar)
    print(f"max scale at alpha_actual: {m_star} "
          f"(cost ratio {econ.cost(m_star) / econ.cost(1000):.4f})"
          if m_star else "no implementation at alpha_actual")
    rows = []
    for alpha in sorted(set(scenario.grids.alpha_levels) | {value}):
        m = econ.max_scale_under_bound(alpha, u_bar)
        ratio = econ.cost(m) / econ.cost(1000) if m else 0.0
        rows.append([_fmt(alpha), str(m), _fmt(ratio)])
    out = _out_dir(args)
    path = out / "example1_scaleback.csv"
    _write_csv(path, _meta_lines(scenario), "alpha,max_scale,cost_ratio", rows)
    print(f"wrote {path}")
    return 0


def cmd_example2(scenario: Scenario, args) -> int:
    variant = _resolve_variant(scenario)
    belief = MixtureBelief(args.pi, variant)
    grids = scenario.grids
    p_grid = probability_grid(grids.sup_base_denom, lo=0.0, hi=args.p_c)
    rows = []
    for alpha in grids.alpha_levels:
        for p in p_grid:
            fp = mixture_fp_at(p, args.p_c, args.n, alpha, belief)
            rows.append([_fmt(alpha), _fmt(p), _fmt(fp), variant,
                         _fmt(args.p_c), str(args.n), _fmt(args.pi)])
    out = _out_dir(args)
    path = out / "example2_surface.csv"
    _write_csv(path, _meta_lines(scenario),
               "alpha_nominal,p,fp,variant,p_C,n,pi", rows)
    print(f"wrote {path}")
    return 0


def cmd_fig1(scenario: Scenario, args) -> int:
    variant = _resolve_variant(scenario)
    grids = scenario.grids
    cal = _calibration(grids.sup_base_denom, grids.sup_refine_denom)
    rows = []
    for p_c in args.p_c:
        for row in actual_fp_curve(p_c, variant, grids.alpha_levels, args.n,
                                   args.pi, base_denom=grids.sup_base_denom,
                                   refine_denom=grids.sup_refine_denom):
            rows.append([_fmt(row.alpha_nominal), _fmt(row.alpha_actual),
                         _fmt(row.p_C), row.variant, str(row.n),
                         _fmt(row.pi)])
            if abs(row.alpha_nominal - 0.05) < 1e-12:
                print(f"p_C={p_c:g}: nominal 0.05 -> actual "
                      f"{row.alpha_actual:.6f}")
    out = _out_dir(args)
    path = out / "fig1.csv"
    _write_csv(path, _meta_lines(scenario),
               "alpha_nominal,alpha_actual,p_C,variant,n,pi", rows)
    sidecar = out / "fig1_calibration.json"
    _write_json(sidecar, {
        "meta": _meta_dict(scenario),
        "calibration": {
            "variant": cal.variant,
            "value": cal.value,
            "residual": cal.residual,
            "target": cal.target,
            "candidates": cal.candidates,
            "p_control": cal.p_control,
            "n": cal.n,
            "pi": cal.pi,
            "alpha_prime": cal.alpha_prime,
        },
    })
    print(f"wrote {path}")
    print(f"wrote {sidecar}")
    return 0


def cmd_decide(scenario: Scenario, args) -> int:
    econ = scenario.economics
    policy = scenario.policy()
    crossing = econ.single_crossing_report(np.linspace(0.05, 0.95, 10))
    if not crossing.holds:
        print(f"warning: net-value shape violated at p={crossing.violating_p:g}, "
              f"m={crossing.violating_m}", file=sys.stderr)
    if scenario.contract is None:
        decision = decide_no_guarantee(args.published_bound, policy, econ)
    else:
        decision = decide_with_contract(args.published_bound, scenario.contract,
                                        policy, econ)
    record = decision.to_record()
    record["published_bound"] = args.published_bound
    record["p0"] = policy.p0
    out = _out_dir(args)
    path = out / "decision.json"
    _write_json(path, {"meta": _meta_dict(scenario), "decision": record})
    verb = f"implement at scale {decision.scale}" if decision.implement \
        else "do not implement"
    print(f"{verb} (rule {decision.rule}, bound {decision.bound:g})")
    print(f"wrote {path}")
    return 0


def cmd_contract(scenario: Scenario, args) -> int:
    if scenario.contract is None:
        raise ConfigError("this subcommand needs a contract block", "contract")
    econ = scenario.economics
    contract = scenario.contract
    m = econ.M
    xs = np.arange(m + 1)
    ys = econ.net_outcome(m, xs)
    payoffs = implementer_payoff(ys, contract)
    payments = researcher_payment(ys, contract)
    rows = ([str(int(x)), _fmt(y), _fmt(po), _fmt(pay)]
            for x, y, po, pay in zip(xs, ys, payoffs, payments))
    out = _out_dir(args)
    path = out / "contract_payoffs.csv"
    _write_csv(path, _meta_lines(scenario),
               "x,y,implementer_payoff,researcher_payment", rows)
    print(f"wrote {path}")

    mi = minimal_insurance(scenario.policy_u_bar, econ.cost(m))
    policy = scenario.policy()
    probe = policy.p0 + 0.5 * (1.0 - policy.p0)
    d_tail = decide_with_contract(probe, TailGuarantee(mi.k), policy, econ)
    d_prop = decide_with_contract(probe, ProportionalGuarantee(mi.s), policy, econ)
    mi_path = out / "minimal_insurance.json"
    _write_json(mi_path, {
        "meta": _meta_dict(scenario),
        "u_bar": scenario.policy_u_bar,
        "c_M": econ.cost(m),
        "tail_k": mi.k,
        "proportional_share": mi.s,
        "tail_decision": d_tail.to_record(),
        "proportional_decision": d_prop.to_record(),
    })
    print(f"minimal insurance: k={mi.k:g}, s={mi.s:g}")
    print(f"wrote {mi_path}")
    return 0


def cmd_researcher(scenario: Scenario, args) -> int:
    econ = scenario.economics
    policy = scenario.policy()
    pub = _pub_prob_fn(scenario, policy.p0)
    probe = policy.p0 + 0.5 * (1.0 - policy.p0)
    if scenario.contract is None:
        decision = decide_no_guarantee(probe, policy, econ)
    else:
        decision = decide_with_contract(probe, scenario.contract, policy, econ)
    m = decision.scale if decision.implement else econ.M
    if not decision.implement:
        print(f"note: implementer would decline; reporting at full scale {m}")
    p_grid = np.linspace(0.05, 0.95, 19)
    part = participation_check(pub, scenario.risk_strategy,
                               scenario.researcher_payoff, scenario.utility,
                               econ, m, p_grid)
    conds = publication_rate_conditions(pub, scenario.risk_strategy,
                                        scenario.researcher_payoff,
                                        scenario.utility, econ, m, p_grid)
    out = _out_dir(args)
    part_path = out / "researcher_participation.csv"
    _write_csv(part_path, _meta_lines(scenario), "p,lhs",
               ([_fmt(p), _fmt(v)] for p, v in zip(part.p_grid, part.lhs)))
    cond_path = out / "researcher_conditions.csv"
    _write_csv(cond_path, _meta_lines(scenario),
               "p,lhs,bound_type,bound,actual",
               ([_fmt(r.p), _fmt(r.lhs), r.regime, _fmt(r.bound),
                 _fmt(r.actual)] for r in conds.rows))
    summary_path = out / "researcher_summary.json"
    _write_json(summary_path, {
        "meta": _meta_dict(scenario),
        "scale": m,
        "participation_minimum": part.minimum,
        "v_bar": part.v_bar,
        "participates": part.passes,
        "any_condition_violation": conds.any_violation,
        "base_expected_utility": expected_utility(
            no_implementation_world(scenario.researcher_payoff),
            scenario.utility),
    })
    status = "holds" if part.passes else "fails"
    print(f"participation {status}: min {part.minimum:.6f} vs floor "
          f"{part.v_bar:g} at scale {m}")
    for path in (part_path, cond_path, summary_path):
        print(f"wrote {path}")
    return 0


def cmd_pool(scenario: Scenario, args) -> int:
    members = scenario.pool.members
    shares = scenario.pool.share_matrix()
    pooled = pool_expected_utility(members, shares)
    standalone = pool_expected_utility(members, np.eye(len(members)))
    rows = []
    for i, mem in enumerate(members):
        rows.append({
            "member": i,
            "standalone_eu": float(standalone[i]),
            "pooled_eu": float(pooled[i]),
            "standalone_ce": mem.utility.certainty_equivalent(float(standalone[i])),
            "pooled_ce": mem.utility.certainty_equivalent(float(pooled[i])),
        })
    out = _out_dir(args)
    path = out / "pool.json"
    _write_json(path, {"meta": _meta_dict(scenario), "members": rows})
    gain = min(r["pooled_ce"] - r["standalone_ce"] for r in rows)
    print(f"pool of {len(members)}: min certainty-equivalent gain {gain:.6f}")
    print(f"wrote {path}")
    return 0


def cmd_reproduce(scenario: Scenario, args) -> int:
    grids = scenario.grids
    rows, cal = evaluate_anchors(seed=scenario.seed,
                                 sup_base_denom=grids.sup_base_denom,
                                 sup_refine_denom=grids.sup_refine_denom,
                                 coverage_denom=grids.coverage_denom)
    print(f"calibrated variant: {cal.variant} "
          f"(value {cal.value:.6f}, residual {cal.residual:.4f})")
    for row in rows:
        status = "PASS" if row.passed else "FAIL"
        print(f"[{status}] {row.ident:>3}  {row.name}")
        print(f"        target: {row.target}")
        print(f"        computed: {row.computed}  (tolerance {row.tolerance})")
    n_pass = sum(r.passed for r in rows)
    print(f"{n_pass}/{len(rows)} anchors pass")
    out = _out_dir(args)
    path = out / "reproduce_report.json"
    _write_json(path, {
        "meta": _meta_dict(scenario),
        "rows": [row.__dict__ for row in rows],
        "all_pass": n_pass == len(rows),
    })
    print(f"wrote {path}")
    return 0 if n_pass == len(rows) else 1


# ---------------------------------------------------------------------------
# Parser.

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON (default: bundled)")
    common.add_argument("--out", help="output directory "
                                      "(default: $GUARANTEESIM_OUT or ./out)")

    parser = argparse.ArgumentParser(
        prog="guaranteesim",
        description="Adverse-selection guarantee simulations for binomial "
                    "policy outcomes")
    parser.add_argument("--version", action="version",
                        version=f"guaranteesim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage", parents=[common],
                       help="coverage/violation curve for a bound procedure")
    p.add_argument("--proc", choices=["clopper_pearson", "wald"])
    p.add_argument("--n", type=int)
    p.add_argument("--alpha-prime", type=float)
    p.set_defaults(handler=cmd_coverage)

    p = sub.add_parser("example1", parents=[common],
                       help="closed-form mixture rate and scale-back table")
    p.add_argument("--alpha-prime", type=float, default=0.01)
    p.add_argument("--pi", type=float, default=0.25)
    p.set_defaults(handler=cmd_example1)

    p = sub.add_parser("example2", parents=[common],
                       help="exact false-positive surface over (alpha, p)")
    p.add_argument("--p-c", type=float, default=0.5)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--pi", type=float, default=0.5)
    p.set_defaults(handler=cmd_example2)

    p = sub.add_parser("fig1", parents=[common],
                       help="nominal-vs-actual curve CSV per control rate")
    p.add_argument("--p-c", type=float, nargs="+", default=[0.5])
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--pi", type=float, default=0.5)
    p.set_defaults(handler=cmd_fig1)

    p = sub.add_parser("decide", parents=[common],
                       help="implementer decision for a published bound")
    p.add_argument("--published-bound", type=float, default=0.5)
    p.set_defaults(handler=cmd_decide)

    p = sub.add_parser("contract", parents=[common],
                       help="payoff table and minimal insurance levels")
    p.set_defaults(handler=cmd_contract)

    p = sub.add_parser("researcher", parents=[common],
                       help="participation and publication-rate reports")
    p.set_defaults(handler=cmd_researcher)

    p = sub.add_parser("pool", parents=[common],
                       help="risk-pool expected utilities")
    p.set_defaults(handler=cmd_pool)

    p = sub.add_parser("reproduce", parents=[common],
                       help="run the full anchor table")
    p.set_defaults(handler=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        scenario = load_scenario(args.config)
        return args.handler(scenario, args)
    except ConfigError as exc:
        where = f" (line {exc.line})" if exc.line else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
