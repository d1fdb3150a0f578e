"""Scenario configuration: one JSON document drives every subcommand.

Validation is strict: unknown keys are rejected, and errors carry the
offending key path so the CLI can point at the line in the file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Optional, Union

import numpy as np

from .binomial import LowerBoundProcedure
from .contracts import (
    FullGuarantee,
    InsuranceContract,
    ProportionalGuarantee,
    TailGuarantee,
)
from .decisions import AlphaSchedule, ImplementerPolicy
from .economics import BenefitFunction, CostSchedule, PolicyEconomics
from .researcher import (
    ImplValue,
    NoHedge,
    NoiseSpec,
    PoolMember,
    ProportionalOnlyGuarantee,
    ResearcherPayoffModel,
    RiskExchange,
    RiskTransfer,
    TailOnlyGuarantee,
    UtilitySpec,
)
from .simulate import DiscreteDist
from .strategies import (
    CONDITIONING_VARIANTS,
    FraudulentStrategy,
    SelectiveStrategy,
    TruthfulStrategy,
)

__all__ = ["ConfigError", "Scenario", "GridSpec", "load_scenario",
           "scenario_from_dict", "default_scenario_dict"]


class ConfigError(ValueError):
    def __init__(self, message: str, key_path: str = "", line: Optional[int] = None):
        self.key_path = key_path
        self.line = line
        prefix = f"{key_path}: " if key_path else ""
        super().__init__(f"{prefix}{message}")


def default_scenario_dict() -> dict:
    """The bundled reference scenario.

    Small enough that every researcher-side quantity enumerates exactly:
    20 recipients, unit costs, benefit 2.5 per success (break-even rate
    0.4), a loss floor at sixty percent of the full cost.
    """
    return {
        "seed": 20260819,
        "economics": {
            "population": 20,
            "cost": {"form": "linear", "unit": 1.0},
            "benefit": {"form": "linear", "per_success": 2.5},
            "dilution_q": 1.0,
        },
        "procedure": {"kind": "clopper_pearson", "alpha": 0.05, "n": 40},
        "strategy": {"variant": "truthful"},
        "belief": {"untruthful_weight": 0.5, "conditioning": "calibrated"},
        "policy": {"u_bar": -12.0, "alpha_belief": 0.25, "p0": None},
        "contract": {"variant": "tail", "k": -12.0},
        "utility": {"form": "cara", "risk_aversion": 0.05, "v_bar": -6.0},
        "researcher_payoff": {
            "base_pub": 2.0,
            "impl_value": {"kind": "constant", "amount": 2.0},
            "failure_exposure": 0.0,
            "noise": None,
        },
        "risk_strategy": {"variant": "none"},
        "pool": {
            "iid": {"count": 2, "values": [0.0, -10.0], "probs": [0.7, 0.3],
                    "base": 0.0},
            "utility": {"form": "cara", "risk_aversion": 0.1},
            "shares": "equal",
        },
        "grids": {
            "coverage_denom": 1024,
            "sup_base_denom": 512,
            "sup_refine_denom": 8192,
            "alpha_levels": [0.001, 0.005, 0.01, 0.025, 0.05, 0.075, 0.1,
                             0.15, 0.2],
        },
        "mc": {"n_draws": 1000000},
    }


@dataclass(frozen=True)
class GridSpec:
    coverage_denom: int = 1024
    sup_base_denom: int = 512
    sup_refine_denom: int = 8192
    alpha_levels: tuple = (0.001, 0.005, 0.01, 0.025, 0.05, 0.075, 0.1,
                           0.15, 0.2)


@dataclass(frozen=True)
class PoolSpec:
    members: list
    shares: Union[str, list]

    def share_matrix(self) -> np.ndarray:
        j = len(self.members)
        if isinstance(self.shares, str):
            if self.shares != "equal":
                raise ConfigError(f"unknown share rule {self.shares!r}", "pool.shares")
            return np.full((j, j), 1.0 / j)
        mat = np.asarray(self.shares, dtype=float)
        if mat.shape != (j, j):
            raise ConfigError(
                f"share matrix must be {j}x{j}, got {mat.shape}", "pool.shares")
        return mat


@dataclass(frozen=True)
class Scenario:
    seed: int
    economics: PolicyEconomics
    procedure: LowerBoundProcedure
    strategy: object
    belief_weight: float
    belief_conditioning: str  # may be "calibrated", resolved by the CLI
    policy_u_bar: float
    policy_alpha: Union[float, AlphaSchedule]
    policy_p0: Optional[float]
    contract: Optional[InsuranceContract]
    utility: UtilitySpec
    researcher_payoff: ResearcherPayoffModel
    risk_strategy: object
    pool: PoolSpec
    grids: GridSpec
    mc_draws: int

    def policy(self) -> ImplementerPolicy:
        p0 = self.policy_p0
        if p0 is None:
            p0 = self.economics.break_even_success_rate()
        return ImplementerPolicy(u_bar=self.policy_u_bar,
                                 alpha_belief=self.policy_alpha, p0=p0)


def _need(block: dict, key: str, path: str) -> Any:
    if key not in block:
        raise ConfigError(f"missing required key {key!r}", path)
    return block[key]


def _reject_unknown(block: dict, allowed, path: str) -> None:
    if not isinstance(block, dict):
        raise ConfigError(f"expected an object, got {type(block).__name__}", path)
    unknown = set(block) - set(allowed)
    if unknown:
        name = sorted(unknown)[0]
        raise ConfigError(f"unknown key {name!r}", f"{path}.{name}" if path else name)


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path)
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", path)
    return value


def _economics(block: dict) -> PolicyEconomics:
    path = "economics"
    _reject_unknown(block, {"population", "cost", "benefit", "dilution_q"}, path)
    M = _integer(_need(block, "population", path), f"{path}.population")
    cost_block = _need(block, "cost", path)
    _reject_unknown(cost_block, {"form", "unit", "fixed", "values"}, f"{path}.cost")
    form = _need(cost_block, "form", f"{path}.cost")
    try:
        if form == "linear":
            costs = CostSchedule.linear(
                _number(_need(cost_block, "unit", f"{path}.cost"),
                        f"{path}.cost.unit"), M)
        elif form == "affine":
            costs = CostSchedule.affine(
                _number(_need(cost_block, "fixed", f"{path}.cost"),
                        f"{path}.cost.fixed"),
                _number(_need(cost_block, "unit", f"{path}.cost"),
                        f"{path}.cost.unit"), M)
        elif form == "table":
            values = _need(cost_block, "values", f"{path}.cost")
            if len(values) != M:
                raise ConfigError(
                    f"cost table has {len(values)} entries for population {M}",
                    f"{path}.cost.values")
            costs = CostSchedule.table(values)
        else:
            raise ConfigError(f"unknown cost form {form!r}", f"{path}.cost.form")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), f"{path}.cost") from exc

    ben_block = _need(block, "benefit", path)
    _reject_unknown(ben_block, {"form", "per_success", "values"}, f"{path}.benefit")
    bform = _need(ben_block, "form", f"{path}.benefit")
    try:
        if bform == "linear":
            benefit = BenefitFunction.linear(
                _number(_need(ben_block, "per_success", f"{path}.benefit"),
                        f"{path}.benefit.per_success"))
        elif bform == "table":
            benefit = BenefitFunction.from_table(
                _need(ben_block, "values", f"{path}.benefit"))
        else:
            raise ConfigError(f"unknown benefit form {bform!r}",
                              f"{path}.benefit.form")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), f"{path}.benefit") from exc

    q = _number(block.get("dilution_q", 1.0), f"{path}.dilution_q")
    try:
        return PolicyEconomics(costs=costs, benefit=benefit, dilution=q)
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc


def _procedure(block: dict) -> LowerBoundProcedure:
    path = "procedure"
    _reject_unknown(block, {"kind", "alpha", "n"}, path)
    try:
        return LowerBoundProcedure(
            kind=_need(block, "kind", path),
            nominal_alpha=_number(_need(block, "alpha", path), f"{path}.alpha"),
            n=_integer(_need(block, "n", path), f"{path}.n"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc


def _strategy(block: dict, procedure: LowerBoundProcedure):
    path = "strategy"
    _reject_unknown(block, {"variant", "guess_spread", "n_per_arm", "alpha"}, path)
    variant = _need(block, "variant", path)
    try:
        if variant == "truthful":
            return TruthfulStrategy(procedure)
        if variant == "fraudulent":
            return FraudulentStrategy(
                procedure,
                guess_spread=_number(block.get("guess_spread", 0.05),
                                     f"{path}.guess_spread"))
        if variant == "selective":
            return SelectiveStrategy(
                n=_integer(_need(block, "n_per_arm", path), f"{path}.n_per_arm"),
                alpha_prime=_number(_need(block, "alpha", path), f"{path}.alpha"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc
    raise ConfigError(f"unknown strategy variant {variant!r}", f"{path}.variant")


def _contract(block) -> Optional[InsuranceContract]:
    if block is None:
        return None
    path = "contract"
    _reject_unknown(block, {"variant", "k", "share"}, path)
    variant = _need(block, "variant", path)
    try:
        if variant == "full":
            return FullGuarantee()
        if variant == "tail":
            return TailGuarantee(k=_number(_need(block, "k", path), f"{path}.k"))
        if variant == "proportional":
            return ProportionalGuarantee(
                share=_number(_need(block, "share", path), f"{path}.share"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc
    raise ConfigError(f"unknown contract variant {variant!r}", f"{path}.variant")


def _alpha_belief(value, path: str):
    if isinstance(value, dict):
        _reject_unknown(value, {"knots"}, path)
        try:
            return AlphaSchedule(tuple(
                (float(k), float(a)) for k, a in _need(value, "knots", path)))
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc), f"{path}.knots") from exc
    return _number(value, path)


def _utility(block: dict) -> UtilitySpec:
    path = "utility"
    _reject_unknown(block, {"form", "risk_aversion", "v_bar"}, path)
    try:
        return UtilitySpec(
            form=_need(block, "form", path),
            risk_aversion=_number(block.get("risk_aversion", 0.0),
                                  f"{path}.risk_aversion"),
            v_bar=_number(block.get("v_bar", float("-inf")), f"{path}.v_bar"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc


def _payoff(block: dict) -> ResearcherPayoffModel:
    path = "researcher_payoff"
    _reject_unknown(block, {"base_pub", "impl_value", "failure_exposure",
                            "noise"}, path)
    impl_block = block.get("impl_value", {"kind": "constant", "amount": 0.0})
    _reject_unknown(impl_block, {"kind", "amount"}, f"{path}.impl_value")
    noise_block = block.get("noise")
    noise = None
    if noise_block is not None:
        _reject_unknown(noise_block, {"epsilon"}, f"{path}.noise")
        noise = NoiseSpec(epsilon=_number(
            _need(noise_block, "epsilon", f"{path}.noise"),
            f"{path}.noise.epsilon"))
    try:
        return ResearcherPayoffModel(
            base_pub=_number(block.get("base_pub", 0.0), f"{path}.base_pub"),
            impl_value=ImplValue(
                kind=impl_block.get("kind", "constant"),
                amount=_number(impl_block.get("amount", 0.0),
                               f"{path}.impl_value.amount")),
            failure_exposure=_number(block.get("failure_exposure", 0.0),
                                     f"{path}.failure_exposure"),
            noise=noise)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc


def _risk_strategy(block: dict):
    path = "risk_strategy"
    _reject_unknown(block, {"variant", "retained", "premium", "assumed",
                            "partner_loss", "k", "share"}, path)
    variant = _need(block, "variant", path)
    try:
        if variant == "none":
            return NoHedge()
        if variant == "transfer":
            return RiskTransfer(
                retained=_number(_need(block, "retained", path), f"{path}.retained"),
                premium=_number(block.get("premium", 0.0), f"{path}.premium"))
        if variant == "exchange":
            partner = _need(block, "partner_loss", path)
            _reject_unknown(partner, {"values", "probs"}, f"{path}.partner_loss")
            law = DiscreteDist(_need(partner, "values", f"{path}.partner_loss"),
                               _need(partner, "probs", f"{path}.partner_loss"))
            return RiskExchange(
                retained=_number(_need(block, "retained", path), f"{path}.retained"),
                assumed=_number(_need(block, "assumed", path), f"{path}.assumed"),
                partner_loss=law)
        if variant == "tail_only":
            return TailOnlyGuarantee(k=_number(_need(block, "k", path), f"{path}.k"))
        if variant == "proportional_only":
            return ProportionalOnlyGuarantee(
                share=_number(_need(block, "share", path), f"{path}.share"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc
    raise ConfigError(f"unknown risk strategy {variant!r}", f"{path}.variant")


def _pool(block: dict) -> PoolSpec:
    path = "pool"
    _reject_unknown(block, {"iid", "members", "utility", "shares"}, path)
    util_block = _need(block, "utility", path)
    _reject_unknown(util_block, {"form", "risk_aversion"}, f"{path}.utility")
    utility = UtilitySpec(form=_need(util_block, "form", f"{path}.utility"),
                          risk_aversion=_number(
                              util_block.get("risk_aversion", 0.0),
                              f"{path}.utility.risk_aversion"))
    members = []
    if "iid" in block:
        iid = block["iid"]
        _reject_unknown(iid, {"count", "values", "probs", "base"}, f"{path}.iid")
        count = _integer(_need(iid, "count", f"{path}.iid"), f"{path}.iid.count")
        if count < 1:
            raise ConfigError("pool needs at least one member", f"{path}.iid.count")
        law = DiscreteDist(_need(iid, "values", f"{path}.iid"),
                           _need(iid, "probs", f"{path}.iid"))
        base = _number(iid.get("base", 0.0), f"{path}.iid.base")
        members = [PoolMember(base=base, loss=law, utility=utility)
                   for _ in range(count)]
    elif "members" in block:
        for i, m in enumerate(block["members"]):
            _reject_unknown(m, {"base", "values", "probs"}, f"{path}.members[{i}]")
            members.append(PoolMember(
                base=_number(m.get("base", 0.0), f"{path}.members[{i}].base"),
                loss=DiscreteDist(_need(m, "values", f"{path}.members[{i}]"),
                                  _need(m, "probs", f"{path}.members[{i}]")),
                utility=utility))
    else:
        raise ConfigError("pool needs either iid or members", path)
    return PoolSpec(members=members, shares=block.get("shares", "equal"))


def _grids(block: dict) -> GridSpec:
    path = "grids"
    _reject_unknown(block, {"coverage_denom", "sup_base_denom",
                            "sup_refine_denom", "alpha_levels"}, path)
    levels = block.get("alpha_levels", GridSpec().alpha_levels)
    return GridSpec(
        coverage_denom=_integer(block.get("coverage_denom", 1024),
                                f"{path}.coverage_denom"),
        sup_base_denom=_integer(block.get("sup_base_denom", 512),
                                f"{path}.sup_base_denom"),
        sup_refine_denom=_integer(block.get("sup_refine_denom", 8192),
                                  f"{path}.sup_refine_denom"),
        alpha_levels=tuple(float(a) for a in levels))


_TOP_KEYS = {"seed", "economics", "procedure", "strategy", "belief", "policy",
             "contract", "utility", "researcher_payoff", "risk_strategy",
             "pool", "grids", "mc"}


def scenario_from_dict(data: dict) -> Scenario:
    _reject_unknown(data, _TOP_KEYS, "")
    defaults = default_scenario_dict()
    merged = {**defaults, **data}

    belief_block = merged["belief"]
    _reject_unknown(belief_block, {"untruthful_weight", "conditioning"}, "belief")
    weight = _number(_need(belief_block, "untruthful_weight", "belief"),
                     "belief.untruthful_weight")
    if not 0.0 <= weight <= 1.0:
        raise ConfigError("weight must lie in [0,1]", "belief.untruthful_weight")
    conditioning = belief_block.get("conditioning", "calibrated")
    if conditioning not in CONDITIONING_VARIANTS + ("calibrated",):
        raise ConfigError(f"unknown conditioning {conditioning!r}",
                          "belief.conditioning")

    policy_block = merged["policy"]
    _reject_unknown(policy_block, {"u_bar", "alpha_belief", "p0"}, "policy")
    p0 = policy_block.get("p0")
    if p0 is not None:
        p0 = _number(p0, "policy.p0")

    mc_block = merged["mc"]
    _reject_unknown(mc_block, {"n_draws"}, "mc")

    procedure = _procedure(merged["procedure"])
    return Scenario(
        seed=_integer(merged["seed"], "seed"),
        economics=_economics(merged["economics"]),
        procedure=procedure,
        strategy=_strategy(merged["strategy"], procedure),
        belief_weight=weight,
        belief_conditioning=conditioning,
        policy_u_bar=_number(_need(policy_block, "u_bar", "policy"),
                             "policy.u_bar"),
        policy_alpha=_alpha_belief(_need(policy_block, "alpha_belief", "policy"),
                                   "policy.alpha_belief"),
        policy_p0=p0,
        contract=_contract(merged["contract"]),
        utility=_utility(merged["utility"]),
        researcher_payoff=_payoff(merged["researcher_payoff"]),
        risk_strategy=_risk_strategy(merged["risk_strategy"]),
        pool=_pool(merged["pool"]),
        grids=_grids(merged["grids"]),
        mc_draws=_integer(mc_block.get("n_draws", 1000000), "mc.n_draws"),
    )


def _line_of_key(raw: str, key_path: str) -> Optional[int]:
    """Best-effort line lookup: first occurrence of the deepest key name."""
    if not key_path:
        return None
    leaf = key_path.split(".")[-1].split("[")[0]
    needle = f'"{leaf}"'
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if needle in line:
            return lineno
    return None


def load_scenario(path: Optional[str]) -> Scenario:
    """Read and validate a scenario file; None loads the bundled default."""
    if path is None:
        return scenario_from_dict(default_scenario_dict())
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    try:
        return scenario_from_dict(data)
    except ConfigError as exc:
        if exc.line is None:
            exc.line = _line_of_key(raw, exc.key_path)
        raise
