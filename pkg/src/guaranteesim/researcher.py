"""Researcher-side expected utility and risk management.

The researcher weighs publishing with a guarantee attached. Outcomes
enter through a composite payoff: a fixed value of publishing, a
deterministic value of seeing the policy implemented at scale m, an
optional fraction of the loss borne even uninsured, and optional
zero-mean noise. Risk-management choices replace the raw guaranteed
position with a transformed one, and everything is evaluated through a
concave utility with a participation floor.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .economics import PolicyEconomics
from .simulate import DiscreteDist

__all__ = [
    "UtilitySpec",
    "ImplValue",
    "NoiseSpec",
    "ResearcherPayoffModel",
    "NoHedge",
    "RiskTransfer",
    "RiskExchange",
    "TailOnlyGuarantee",
    "ProportionalOnlyGuarantee",
    "researcher_world",
    "no_implementation_world",
    "expected_utility",
    "participation_check",
    "ParticipationReport",
    "publication_rate_conditions",
    "ConditionRow",
    "ConditionsReport",
    "PoolMember",
    "pool_expected_utility",
]

_EXP_CAP = 700.0


@dataclass(frozen=True)
class UtilitySpec:
    """Strictly increasing evaluator with v(0) = 0 and a participation floor."""

    form: str  # "linear" or "cara"
    risk_aversion: float = 0.0
    v_bar: float = float("-inf")

    def __post_init__(self):
        if self.form not in ("linear", "cara"):
            raise ValueError(f"unknown utility form {self.form!r}")
        if self.form == "cara" and self.risk_aversion <= 0.0:
            raise ValueError("CARA needs a positive risk aversion")

    def value(self, w):
        w = np.asarray(w, dtype=float)
        if self.form == "linear":
            out = w
        else:
            a = self.risk_aversion
            expo = -a * w
            if np.any(expo > _EXP_CAP):
                warnings.warn(
                    "CARA utility saturated: outcomes below the exponent range",
                    RuntimeWarning, stacklevel=2)
                expo = np.minimum(expo, _EXP_CAP)
            out = (1.0 - np.exp(expo)) / a
        return float(out) if out.ndim == 0 else out

    def certainty_equivalent(self, eu: float) -> float:
        if self.form == "linear":
            return eu
        a = self.risk_aversion
        inner = 1.0 - a * eu
        if inner <= 0.0:
            raise ValueError(f"expected utility {eu} outside the CARA range")
        return -np.log(inner) / a


@dataclass(frozen=True)
class ImplValue:
    """Deterministic value to the researcher of implementation at scale m."""

    kind: str = "constant"  # "constant" or "linear"
    amount: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "linear"):
            raise ValueError(f"unknown impl_value kind {self.kind!r}")

    def value(self, m: int) -> float:
        if m == 0:
            return 0.0
        return self.amount * m if self.kind == "linear" else self.amount


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean two-point perturbation, +-epsilon with equal weight."""

    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("noise amplitude must be positive")

    def law(self) -> DiscreteDist:
        return DiscreteDist([-self.epsilon, self.epsilon], [0.5, 0.5])


@dataclass(frozen=True)
class ResearcherPayoffModel:
    base_pub: float = 0.0
    impl_value: ImplValue = ImplValue()
    failure_exposure: float = 0.0  # fraction of the loss borne uninsured
    noise: Optional[NoiseSpec] = None

    def __post_init__(self):
        if not 0.0 <= self.failure_exposure <= 1.0:
            raise ValueError("failure exposure must lie in [0,1]")


@dataclass(frozen=True)
class NoHedge:
    pass


@dataclass(frozen=True)
class RiskTransfer:
    retained: float  # fraction of the loss kept
    premium: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.retained <= 1.0:
            raise ValueError("retained fraction must lie in [0,1]")
        if self.premium < 0.0:
            raise ValueError("premium cannot be negative")


@dataclass(frozen=True)
class RiskExchange:
    retained: float
    assumed: float
    partner_loss: DiscreteDist  # law of the partner's loss (nonpositive support)

    def __post_init__(self):
        if not 0.0 <= self.retained <= 1.0:
            raise ValueError("retained fraction must lie in [0,1]")
        if not 0.0 <= self.assumed <= 1.0:
            raise ValueError("assumed fraction must lie in [0,1]")
        if (self.partner_loss.values > 0.0).any():
            raise ValueError("partner loss law must be nonpositive")


@dataclass(frozen=True)
class TailOnlyGuarantee:
    k: float

    def __post_init__(self):
        if self.k >= 0.0:
            raise ValueError("tail level must be negative")


@dataclass(frozen=True)
class ProportionalOnlyGuarantee:
    share: float

    def __post_init__(self):
        if not 0.0 < self.share < 1.0:
            raise ValueError("loss share must lie strictly in (0,1)")


def _with_noise(dist: DiscreteDist, payoff: ResearcherPayoffModel) -> DiscreteDist:
    if payoff.noise is None:
        return dist
    return dist.combine(payoff.noise.law(), lambda w, e: w + e).compress()


def no_implementation_world(payoff: ResearcherPayoffModel) -> DiscreteDist:
    """The researcher's position when nothing gets implemented."""
    return _with_noise(DiscreteDist.point(payoff.base_pub), payoff)


def researcher_world(risk, payoff: ResearcherPayoffModel, m: int,
                     econ: PolicyEconomics, p: float) -> DiscreteDist:
    """Exact law of the researcher's position W at implementation scale m.

    The guarantee exposes the researcher to the implementation loss Y-;
    each risk strategy decides how much of that exposure stays:

    * NoHedge keeps all of it,
    * RiskTransfer keeps a fraction and pays a premium,
    * RiskExchange swaps loss shares with an independent partner,
    * TailOnlyGuarantee only ever owed the loss beyond its level k,
    * ProportionalOnlyGuarantee only ever owed its share of the loss.
    """
    if m < 1:
        raise ValueError("implementation scale must be at least 1")
    x_law = DiscreteDist.binomial(m, econ.success_rate(p))
    y = econ.net_outcome(m, x_law.values.astype(int))
    y_minus = np.minimum(y, 0.0)
    v0 = payoff.base_pub + payoff.impl_value.value(m) \
        + payoff.failure_exposure * y_minus

    if isinstance(risk, NoHedge):
        w = v0 + y_minus
    elif isinstance(risk, RiskTransfer):
        w = v0 + risk.retained * y_minus - risk.premium
    elif isinstance(risk, RiskExchange):
        w = v0 + risk.retained * y_minus
    elif isinstance(risk, TailOnlyGuarantee):
        w = v0 + np.minimum(y - risk.k, 0.0)
    elif isinstance(risk, ProportionalOnlyGuarantee):
        w = v0 + risk.share * y_minus
    else:
        raise TypeError(f"unknown risk strategy {risk!r}")

    dist = DiscreteDist(w, x_law.probs).compress()
    if isinstance(risk, RiskExchange):
        dist = dist.combine(
            risk.partner_loss, lambda a, z: a + risk.assumed * z).compress()
    return _with_noise(dist, payoff)


def expected_utility(dist: DiscreteDist, utility: UtilitySpec) -> float:
    return dist.expectation(utility.value)


@dataclass(frozen=True)
class ParticipationReport:
    p_grid: np.ndarray
    lhs: np.ndarray
    minimum: float
    v_bar: float
    passes: bool


def participation_check(pub_prob, risk, payoff: ResearcherPayoffModel,
                        utility: UtilitySpec, econ: PolicyEconomics, m: int,
                        p_grid) -> ParticipationReport:
    """Expected utility of offering the guarantee, floor-checked at each p.

    pub_prob maps a true success rate p to the probability the published
    bound triggers implementation. The left-hand side mixes the
    implemented and not-implemented worlds by that probability; the check
    passes when the minimum over the grid stays at or above the floor.
    """
    grid = np.asarray(p_grid, dtype=float)
    base_eu = expected_utility(no_implementation_world(payoff), utility)
    lhs = np.empty(grid.size)
    for i, p in enumerate(grid):
        pr = float(pub_prob(p))
        impl_eu = expected_utility(researcher_world(risk, payoff, m, econ, p),
                                   utility)
        lhs[i] = (1.0 - pr) * base_eu + pr * impl_eu
    minimum = float(lhs.min())
    return ParticipationReport(
        p_grid=grid, lhs=lhs, minimum=minimum, v_bar=utility.v_bar,
        passes=minimum >= utility.v_bar)


@dataclass(frozen=True)
class ConditionRow:
    p: float
    lhs: float
    regime: str  # none | upper | lower | vacuous | infeasible
    bound: float
    actual: float
    violated: bool


@dataclass(frozen=True)
class ConditionsReport:
    rows: list
    any_violation: bool


def publication_rate_conditions(pub_prob, risk, payoff: ResearcherPayoffModel,
                                utility: UtilitySpec, econ: PolicyEconomics,
                                m: int, p_grid,
                                atol: float = 1e-12) -> ConditionsReport:
    """Bounds the participation floor imposes on Pr(trigger) at each p.

    With A the not-implemented expected utility and B the implemented one,
    the floor requires (1-pr)A + pr*B >= v_bar. When only B falls short
    the requirement caps pr from above (a false-positive limit); when only
    A falls short it forces pr up from below (a power requirement); when
    both fall short no pr works; when A = B the probability drops out.
    """
    grid = np.asarray(p_grid, dtype=float)
    v_bar = utility.v_bar
    a_val = expected_utility(no_implementation_world(payoff), utility)
    rows = []
    for p in grid:
        pr = float(pub_prob(p))
        b_val = expected_utility(researcher_world(risk, payoff, m, econ, p),
                                 utility)
        lhs = (1.0 - pr) * a_val + pr * b_val
        scale = max(abs(a_val), abs(b_val), 1.0)
        if abs(a_val - b_val) <= atol * scale:
            regime = "vacuous" if a_val >= v_bar else "infeasible"
            bound = float("nan")
            violated = a_val < v_bar
        elif a_val >= v_bar and b_val >= v_bar:
            regime, bound, violated = "none", float("nan"), False
        elif a_val >= v_bar > b_val:
            bound = (a_val - v_bar) / (a_val - b_val)
            regime, violated = "upper", pr > bound
        elif b_val >= v_bar > a_val:
            bound = (a_val - v_bar) / (a_val - b_val)
            regime, violated = "lower", pr < bound
        else:
            regime, bound, violated = "infeasible", float("nan"), True
        rows.append(ConditionRow(p=float(p), lhs=lhs, regime=regime,
                                 bound=bound, actual=pr, violated=violated))
    return ConditionsReport(rows=rows,
                            any_violation=any(r.violated for r in rows))


@dataclass(frozen=True)
class PoolMember:
    base: float
    loss: DiscreteDist
    utility: UtilitySpec


_POOL_OUTCOME_LIMIT = 2_000_000


def pool_expected_utility(members, share_matrix) -> np.ndarray:
    """Expected utility per member when independent losses are shared.

    share_matrix[i, j] is the fraction of member j's loss borne by member
    i; each row must sum to 1 so every member holds a full portfolio
    share. Identity shares reproduce standalone positions.
    """
    members = list(members)
    j = len(members)
    shares = np.asarray(share_matrix, dtype=float)
    if shares.shape != (j, j):
        raise ValueError(f"share matrix must be {j}x{j}, got {shares.shape}")
    if (shares < 0.0).any():
        raise ValueError("shares cannot be negative")
    if not np.allclose(shares.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("each share-matrix row must sum to 1")

    sizes = [len(mem.loss) for mem in members]
    total = int(np.prod(sizes))
    if total > _POOL_OUTCOME_LIMIT:
        raise ValueError(
            f"joint enumeration of {total} outcomes exceeds the limit; "
            "coarsen the loss laws")
    grids = np.meshgrid(*[mem.loss.values for mem in members], indexing="ij")
    outcomes = np.stack([g.ravel() for g in grids], axis=1)  # (N, J)
    prob_grids = np.meshgrid(*[mem.loss.probs for mem in members], indexing="ij")
    probs = np.ones(total)
    for g in prob_grids:
        probs = probs * g.ravel()

    out = np.empty(j)
    for i, mem in enumerate(members):
        w = mem.base + outcomes @ shares[i]
        out[i] = float(probs @ mem.utility.value(w))
    return out
