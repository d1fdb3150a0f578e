"""Simulations of the researcher-implementer guarantee game with binomial
policy outcomes: exact confidence-bound machinery, publication strategy
models, implementer decision rules, guarantee contract algebra, and
researcher-side expected utility with risk management and pooling."""

__version__ = "0.1.0"

from .binomial import (
    LowerBoundProcedure,
    clopper_pearson_lower,
    coverage_report,
    exact_lower_coverage,
    exceedance_prob,
    normal_quantile,
    probability_grid,
    sup_false_positive,
    wald_lower,
)
from .config import ConfigError, Scenario, default_scenario_dict, load_scenario
from .contracts import (
    FullGuarantee,
    ProportionalGuarantee,
    TailGuarantee,
    implementer_payoff,
    minimal_insurance,
    researcher_payment,
)
from .decisions import (
    AlphaSchedule,
    Decision,
    ImplementerPolicy,
    ScheduleRequiredError,
    decide_no_guarantee,
    decide_with_contract,
    worst_case_bound,
)
from .economics import (
    BenefitFunction,
    CostSchedule,
    NoBreakEvenError,
    PolicyEconomics,
)
from .reproduce import AnchorRow, evaluate_anchors
from .researcher import (
    ImplValue,
    NoHedge,
    PoolMember,
    ProportionalOnlyGuarantee,
    ResearcherPayoffModel,
    RiskExchange,
    RiskTransfer,
    TailOnlyGuarantee,
    UtilitySpec,
    expected_utility,
    participation_check,
    pool_expected_utility,
    publication_rate_conditions,
    researcher_world,
)
from .simulate import DiscreteDist, McEstimate, SeededStream, enumerate_outcomes, mc_estimate
from .strategies import (
    CalibrationResult,
    FraudulentStrategy,
    MixtureBelief,
    SelectiveStrategy,
    TruthfulStrategy,
    actual_fp_curve,
    calibrate_conditioning,
    fraud_mixture_fp,
    mixture_actual_fp,
    mixture_fp_at,
)

__all__ = [
    "__version__",
    "LowerBoundProcedure",
    "clopper_pearson_lower",
    "coverage_report",
    "exact_lower_coverage",
    "exceedance_prob",
    "normal_quantile",
    "probability_grid",
    "sup_false_positive",
    "wald_lower",
    "ConfigError",
    "Scenario",
    "default_scenario_dict",
    "load_scenario",
    "FullGuarantee",
    "ProportionalGuarantee",
    "TailGuarantee",
    "implementer_payoff",
    "minimal_insurance",
    "researcher_payment",
    "AlphaSchedule",
    "Decision",
    "ImplementerPolicy",
    "ScheduleRequiredError",
    "decide_no_guarantee",
    "decide_with_contract",
    "worst_case_bound",
    "BenefitFunction",
    "CostSchedule",
    "NoBreakEvenError",
    "PolicyEconomics",
    "AnchorRow",
    "evaluate_anchors",
    "ImplValue",
    "NoHedge",
    "PoolMember",
    "ProportionalOnlyGuarantee",
    "ResearcherPayoffModel",
    "RiskExchange",
    "RiskTransfer",
    "TailOnlyGuarantee",
    "UtilitySpec",
    "expected_utility",
    "participation_check",
    "pool_expected_utility",
    "publication_rate_conditions",
    "researcher_world",
    "DiscreteDist",
    "McEstimate",
    "SeededStream",
    "enumerate_outcomes",
    "mc_estimate",
    "CalibrationResult",
    "FraudulentStrategy",
    "MixtureBelief",
    "SelectiveStrategy",
    "TruthfulStrategy",
    "actual_fp_curve",
    "calibrate_conditioning",
    "fraud_mixture_fp",
    "mixture_actual_fp",
    "mixture_fp_at",
]
