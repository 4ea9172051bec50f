"""Production-function algebra for service delivery.

Three classic families are provided: Leontief (fixed proportions, no
substitution), Cobb-Douglas (unit elasticity) and CES (constant
elasticity of substitution).  The simulator's feasibility gate is
Leontief-shaped: an appointment needs fixed minutes from each required
worker cadre plus its essential consumables, and runs only when all of
them are available.  Cobb-Douglas and CES are library surface for
analysis and sensitivity work; they never gate delivery.

All operations here are pure functions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional, Sequence, Union


@dataclass(frozen=True)
class Leontief:
    """output = min over {i: a_i > 0} of inputs_i / a_i.

    Inputs with a zero coefficient are ignored (not required).
    """

    coefficients: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(a) for a in self.coefficients))
        if any(a < 0 or not math.isfinite(a) for a in self.coefficients):
            raise ValueError("Leontief coefficients must be finite and >= 0")
        if not any(a > 0 for a in self.coefficients):
            raise ValueError("Leontief needs at least one positive coefficient")


@dataclass(frozen=True)
class CobbDouglas:
    """output = scale * prod(inputs_i ** exponents_i), with 0**0 treated as 1."""

    scale: float
    exponents: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(float(a) for a in self.exponents))
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("Cobb-Douglas scale must be finite and > 0")
        if any(a < 0 or not math.isfinite(a) for a in self.exponents):
            raise ValueError("Cobb-Douglas exponents must be finite and >= 0")
        if not any(a > 0 for a in self.exponents):
            raise ValueError("Cobb-Douglas needs at least one positive exponent")


@dataclass(frozen=True)
class CES:
    """output = scale * (sum(shares_i * inputs_i ** rho)) ** (1/rho).

    rho <= 1 and rho != 0; shares are positive and sum to one.  As
    rho -> -inf the function approaches Leontief with unit coefficients,
    and as rho -> 0 it approaches Cobb-Douglas with the shares as
    exponents.
    """

    scale: float
    shares: tuple[float, ...]
    rho: float

    def __post_init__(self):
        object.__setattr__(self, "shares", tuple(float(d) for d in self.shares))
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("CES scale must be finite and > 0")
        if any(d <= 0 or not math.isfinite(d) for d in self.shares):
            raise ValueError("CES shares must be finite and > 0")
        if abs(sum(self.shares) - 1.0) > 1e-9:
            raise ValueError("CES shares must sum to 1 (tolerance 1e-9)")
        if self.rho == 0 or self.rho > 1 or not math.isfinite(self.rho):
            raise ValueError("CES substitution parameter must satisfy rho <= 1, rho != 0")


ProductionFunction = Union[Leontief, CobbDouglas, CES]


def output(pf: ProductionFunction, inputs: Sequence[float]) -> float:
    """Evaluate a production function on a vector of non-negative inputs."""
    if isinstance(pf, Leontief):
        n = len(pf.coefficients)
    elif isinstance(pf, CobbDouglas):
        n = len(pf.exponents)
    elif isinstance(pf, CES):
        n = len(pf.shares)
    else:
        raise TypeError(f"not a production function: {pf!r}")
    if len(inputs) != n:
        raise ValueError(f"expected {n} inputs, got {len(inputs)}")
    xs = [float(x) for x in inputs]
    if any(x < 0 for x in xs):
        raise ValueError("inputs must be >= 0")

    if isinstance(pf, Leontief):
        return min(x / a for x, a in zip(xs, pf.coefficients) if a > 0)
    if isinstance(pf, CobbDouglas):
        out = pf.scale
        for x, a in zip(xs, pf.exponents):
            if a > 0:
                out *= x ** a
        return out
    # CES: with a negative rho, any zero input drives output to its limit 0.
    if pf.rho < 0 and any(x == 0 for x in xs):
        return 0.0
    inner = sum(d * x ** pf.rho for d, x in zip(pf.shares, xs))
    return pf.scale * inner ** (1.0 / pf.rho)


@dataclass(frozen=True)
class CapacityShifters:
    """Multiplicative adjustments to a cadre's available patient-facing minutes.

    absence_rate scales time down for workers not at their post;
    ownership_multiplier and facility_scale_multiplier carry the effects
    of who runs the facility and of its size/management.  Identity
    defaults leave capacity untouched.
    """

    absence_rate: float = 0.0
    ownership_multiplier: float = 1.0
    facility_scale_multiplier: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.absence_rate < 1.0:
            raise ValueError(f"absence_rate must be in [0, 1), got {self.absence_rate}")
        if not self.ownership_multiplier > 0:
            raise ValueError("ownership_multiplier must be > 0")
        if not self.facility_scale_multiplier > 0:
            raise ValueError("facility_scale_multiplier must be > 0")


IDENTITY_SHIFTERS = CapacityShifters()


@dataclass(frozen=True)
class AppointmentFootprint:
    """Minutes required from each cadre to deliver one appointment."""

    minutes: Mapping[str, float]

    def __post_init__(self):
        m = dict(self.minutes)
        if any(v < 0 or not math.isfinite(v) for v in m.values()):
            raise ValueError("footprint minutes must be finite and >= 0")
        if not any(v > 0 for v in m.values()):
            raise ValueError("footprint needs at least one positive entry")
        object.__setattr__(self, "minutes", m)

    def required_cadres(self) -> list[str]:
        return [c for c, v in self.minutes.items() if v > 0]


def effective_minutes(staff_count: int, minutes_per_day: float, shifters: CapacityShifters) -> float:
    """Daily patient-facing minutes a cadre can supply at one facility group."""
    if staff_count < 0:
        raise ValueError("staff_count must be >= 0")
    if minutes_per_day < 0:
        raise ValueError("minutes_per_day must be >= 0")
    return (
        staff_count
        * minutes_per_day
        * (1.0 - shifters.absence_rate)
        * shifters.ownership_multiplier
        * shifters.facility_scale_multiplier
    )


class ConsumableStatus(enum.Enum):
    """Joint availability of an appointment's consumable requirements."""

    FULL = "full"                          # essentials and optionals all available
    PARTIAL = "partial"                    # essentials available, some optional missing
    MISSING_ESSENTIAL = "missing_essential"


class Verdict(enum.Enum):
    DELIVER_FULL = "deliver_full"
    DELIVER_PARTIAL = "deliver_partial"
    INFEASIBLE = "infeasible"


class FeasibilityResult(NamedTuple):
    verdict: Verdict
    reason: Optional[str] = None  # "consumables" | "presence" | "time" when infeasible

    @property
    def delivered(self) -> bool:
        return self.verdict is not Verdict.INFEASIBLE


_INFEASIBLE_CONSUMABLES = FeasibilityResult(Verdict.INFEASIBLE, "consumables")
_INFEASIBLE_PRESENCE = FeasibilityResult(Verdict.INFEASIBLE, "presence")
_INFEASIBLE_TIME = FeasibilityResult(Verdict.INFEASIBLE, "time")
_DELIVER_FULL = FeasibilityResult(Verdict.DELIVER_FULL)
_DELIVER_PARTIAL = FeasibilityResult(Verdict.DELIVER_PARTIAL)


def feasible(
    footprint: Union[AppointmentFootprint, Mapping[str, float]],
    remaining: Mapping[str, float],
    staff_present: Mapping[str, int],
    consumables: ConsumableStatus,
    mode: int,
) -> FeasibilityResult:
    """Decide whether one appointment can run under a constraint mode.

    Mode 0 delivers regardless of staff.  Mode 1 additionally requires at
    least one worker of every required cadre to exist at the facility
    group.  Mode 2 additionally requires the remaining daily minutes of
    every required cadre to cover the footprint.  Missing essential
    consumables block delivery in every mode; missing optional
    consumables downgrade delivery to partial.

    Checks are ordered consumables, presence, time; the reason reports
    the first gate that failed.  ``remaining`` and the footprint must be
    expressed in the same unit (the ledger uses integer tenths of a
    minute; plain float minutes work equally).
    """
    if mode not in (0, 1, 2):
        raise ValueError(f"mode must be 0, 1 or 2, got {mode}")
    req = footprint.minutes if isinstance(footprint, AppointmentFootprint) else footprint

    if consumables is ConsumableStatus.MISSING_ESSENTIAL:
        return _INFEASIBLE_CONSUMABLES
    if mode >= 1:
        for cadre, minutes in req.items():
            if minutes > 0 and staff_present.get(cadre, 0) < 1:
                return _INFEASIBLE_PRESENCE
    if mode == 2:
        for cadre, minutes in req.items():
            if minutes > 0 and remaining.get(cadre, 0) < minutes:
                return _INFEASIBLE_TIME
    return _DELIVER_PARTIAL if consumables is ConsumableStatus.PARTIAL else _DELIVER_FULL
