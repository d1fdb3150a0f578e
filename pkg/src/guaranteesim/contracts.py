"""Guarantee payoff algebra.

Three contract shapes over the realized net outcome Y:

* full: the researcher absorbs every loss, the implementer keeps max(Y, 0);
* tail(k): losses below k are absorbed, the implementer keeps max(Y, k);
* proportional(s): the researcher pays the share s of any loss, the
  implementer keeps Y+ plus (1-s) of Y-.

researcher_payment is the transfer that funds the difference, so
payoff = Y + payment holds by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "FullGuarantee",
    "TailGuarantee",
    "ProportionalGuarantee",
    "InsuranceContract",
    "split_outcome",
    "OutcomeLedger",
    "implementer_payoff",
    "researcher_payment",
    "minimal_insurance",
    "MinimalInsurance",
]


@dataclass(frozen=True)
class FullGuarantee:
    pass


@dataclass(frozen=True)
class TailGuarantee:
    k: float

    def __post_init__(self):
        if self.k >= 0.0:
            raise ValueError(f"tail level must be negative, got {self.k}")

    def check_scale_cost(self, c_m: float) -> None:
        # k below -c_m can never bind: Y >= -c_m always
        if self.k <= -c_m:
            raise ValueError(
                f"tail level {self.k} at or below -c_m = {-c_m}; the guarantee never pays")


@dataclass(frozen=True)
class ProportionalGuarantee:
    share: float  # researcher's share s of the loss

    def __post_init__(self):
        if not 0.0 < self.share < 1.0:
            raise ValueError(f"loss share must lie strictly in (0,1), got {self.share}")


InsuranceContract = Union[FullGuarantee, TailGuarantee, ProportionalGuarantee]


@dataclass(frozen=True)
class OutcomeLedger:
    y: float
    y_plus: float
    y_minus: float


def split_outcome(y: float) -> OutcomeLedger:
    return OutcomeLedger(y=y, y_plus=max(y, 0.0), y_minus=min(y, 0.0))


def implementer_payoff(y, contract: InsuranceContract):
    """The implementer's outcome after the guarantee pays out."""
    y = np.asarray(y, dtype=float)
    if isinstance(contract, FullGuarantee):
        out = np.maximum(y, 0.0)
    elif isinstance(contract, TailGuarantee):
        out = np.maximum(y, contract.k)
    elif isinstance(contract, ProportionalGuarantee):
        out = np.maximum(y, 0.0) + (1.0 - contract.share) * np.minimum(y, 0.0)
    else:
        raise TypeError(f"unknown contract {contract!r}")
    return float(out) if out.ndim == 0 else out


def researcher_payment(y, contract: InsuranceContract):
    """What the researcher pays out; nonnegative, zero on any gain."""
    y = np.asarray(y, dtype=float)
    out = implementer_payoff(y, contract) - y
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class MinimalInsurance:
    k: float
    s: float


def minimal_insurance(u_bar: float, c_m: float) -> MinimalInsurance:
    """Cheapest guarantee levels meeting an expected-loss floor at cost c_m.

    Returns the tail level k = u_bar and the proportional share s =
    -u_bar/c_m. The tail form always clears the floor on its own. The
    proportional form leaves the implementer a worst case of -(1-s)*c_m,
    which clears the floor at this scale exactly when |u_bar| >= c_m/2, so
    pair it with instances in that range when acceptance at scale matters.
    """
    if c_m <= 0.0:
        raise ValueError(f"cost must be positive, got {c_m}")
    if u_bar >= 0.0:
        raise ValueError(f"loss limit must be negative, got {u_bar}")
    if u_bar <= -c_m:
        raise ValueError(
            f"loss limit {u_bar} at or below -c_m = {-c_m}: the uninsured worst case "
            "already satisfies the floor, no insurance needed")
    return MinimalInsurance(k=u_bar, s=-u_bar / c_m)
