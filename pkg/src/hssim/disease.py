"""Config-driven disease framework.

Diseases are data, not code: a definition lists an incidence hazard, an
ordered chain of states (each with a disability weight, a daily death
hazard, progression probabilities, emitted symptoms and a spontaneous
recovery probability) and a treatment recipe.  The same machinery runs
any number of diseases per scenario; there are no bespoke dynamics.

Daily hazards meet the daily tick as p = 1 - exp(-hazard).  Within one
state the outcome precedence on a single uniform draw is death, then
progression targets in declared order, then recovery, then stay.

Scalar operations are the contract (and the oracle surface for tests);
`incidence_step` and `progression_day` are the vectorized paths the
engine drives, keyed identically per (person, date).
"""

from __future__ import annotations

import datetime as dt
import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .population import FEMALE, Population
from .production import AppointmentFootprint, ConsumableStatus
from .rng import RngRegistry


@dataclass(frozen=True)
class DiseaseState:
    name: str
    disability_weight: float                 # in [0, 1]
    daily_death_hazard: float                # rate per day
    progression: dict[str, float]            # next-state name -> daily probability
    recovery_probability: float              # per day, clears the condition
    symptoms: frozenset[str]

    def death_probability(self) -> float:
        return -math.expm1(-self.daily_death_hazard)


@dataclass(frozen=True)
class TreatmentSpec:
    """How one delivered appointment attempts to resolve the disease."""

    footprint: AppointmentFootprint
    essential_consumables: frozenset[str]
    optional_consumables: frozenset[str]
    priority: int
    facility_level: str
    diagnostic_sensitivity: float
    diagnostic_specificity: float
    cure_probability: float
    partial_effect: float  # cure multiplier when optional consumables are missing


@dataclass(frozen=True)
class IncidenceModel:
    base_hazard_per_day: float
    age_band_lower: Optional[tuple[float, ...]] = None
    age_multipliers: Optional[tuple[float, ...]] = None
    female_multiplier: float = 1.0
    male_multiplier: float = 1.0


@dataclass(frozen=True)
class DiseaseDefinition:
    id: str
    incidence: IncidenceModel
    states: tuple[DiseaseState, ...]
    treatment: Optional[TreatmentSpec]  # None disables care for this disease

    def state_index(self, name: str) -> int:
        for i, s in enumerate(self.states):
            if s.name == name:
                return i
        raise KeyError(name)

    def outcome_thresholds(self, state_idx: int) -> tuple[np.ndarray, list[int]]:
        """Cumulative outcome edges for one state on a single uniform.

        Returns (edges, progression target indices); a draw u falls into
        death when u < edges[0], into progression target k when
        u < edges[1 + k], into recovery when u < edges[-1], else stay.
        """
        s = self.states[state_idx]
        probs = [s.death_probability()]
        targets = []
        for name, p in s.progression.items():
            probs.append(p)
            targets.append(self.state_index(name))
        probs.append(s.recovery_probability)
        return np.cumsum(probs), targets


class ProgressionOutcome(enum.Enum):
    STAY = "stay"
    PROGRESS = "progress"
    RECOVER = "recover"
    DIE = "die"


class TreatmentOutcome(enum.Enum):
    CURED = "cured"
    NOT_CURED = "not_cured"
    FALSE_NEGATIVE_NO_TREATMENT = "false_negative_no_treatment"


def hazard_multipliers(defn: DiseaseDefinition, ages: np.ndarray, sex: np.ndarray) -> np.ndarray:
    inc = defn.incidence
    hazard = np.full(ages.shape, inc.base_hazard_per_day)
    if inc.age_band_lower is not None:
        band = np.maximum(np.searchsorted(inc.age_band_lower, ages, side="right") - 1, 0)
        hazard = hazard * np.asarray(inc.age_multipliers)[band]
    hazard = hazard * np.where(sex == FEMALE, inc.female_multiplier, inc.male_multiplier)
    return hazard


def incidence_step(
    pop: Population, defn: DiseaseDefinition, date: dt.date, rng: RngRegistry
) -> list[int]:
    """Independent daily onset draws for everyone alive and not carrying.

    New cases enter the first state; its symptoms follow automatically
    because symptoms are derived from current states.  Returns onset ids.
    """
    n = len(pop)
    if n == 0:
        return []
    state = pop.conditions[defn.id]
    eligible = pop.alive & (state < 0)
    if not eligible.any():
        return []
    hazard = hazard_multipliers(defn, pop.ages_years(date), pop.sex)
    p = -np.expm1(-hazard)
    u = rng.stream(f"incidence:{defn.id}").uniforms(n, date)
    onset = eligible & (u < p)
    ids = np.nonzero(onset)[0]
    state[ids] = 0
    return list(map(int, ids))


def progression_step(
    pop: Population,
    person: int,
    defn: DiseaseDefinition,
    date: dt.date,
    rng: RngRegistry,
    cause_code: int = 1,
) -> ProgressionOutcome:
    """Sample and apply one carrier's daily outcome.

    Exactly one of die / progress / recover / stay happens, from a
    single uniform keyed by (person, date).  Recovery clears the
    condition (and with it the symptoms it emitted); death clears
    ``alive`` and records the cause code.
    """
    state_arr = pop.conditions[defn.id]
    s = int(state_arr[person])
    if s < 0:
        raise ValueError(f"person {person} does not carry {defn.id!r}")
    edges, targets = defn.outcome_thresholds(s)
    u = rng.stream(f"progression:{defn.id}").uniform(person, date)
    k = int(np.searchsorted(edges, u, side="right"))
    if k == 0:
        pop.alive[person] = False
        pop.cause_of_death[person] = cause_code
        state_arr[person] = -1
        return ProgressionOutcome.DIE
    if k <= len(targets):
        state_arr[person] = targets[k - 1]
        return ProgressionOutcome.PROGRESS
    if k == len(targets) + 1:
        state_arr[person] = -1
        return ProgressionOutcome.RECOVER
    return ProgressionOutcome.STAY


def progression_day(
    pop: Population, defn: DiseaseDefinition, date: dt.date, rng: RngRegistry, cause_code: int
) -> tuple[list[int], list[int]]:
    """Vectorized daily progression for all carriers of one disease.

    Applies the same per-(person, date) draws as `progression_step`.
    Returns (ids died today, ids recovered today).
    """
    n = len(pop)
    state_arr = pop.conditions[defn.id]
    carriers = pop.alive & (state_arr >= 0)
    if not carriers.any():
        return [], []
    u = rng.stream(f"progression:{defn.id}").uniforms(n, date)
    state_at_open = state_arr.copy()  # a person transitions at most once per day
    died: list[int] = []
    recovered: list[int] = []
    for s in range(len(defn.states)):
        in_state = np.nonzero(carriers & (state_at_open == s))[0]
        if in_state.size == 0:
            continue
        edges, targets = defn.outcome_thresholds(s)
        k = np.searchsorted(edges, u[in_state], side="right")
        die_ids = in_state[k == 0]
        pop.alive[die_ids] = False
        pop.cause_of_death[die_ids] = cause_code
        state_arr[die_ids] = -1
        died.extend(map(int, die_ids))
        for t, target in enumerate(targets):
            state_arr[in_state[k == t + 1]] = target
        rec_ids = in_state[k == len(targets) + 1]
        state_arr[rec_ids] = -1
        recovered.extend(map(int, rec_ids))
    return died, recovered


def apply_treatment(
    pop: Population,
    person: int,
    defn: DiseaseDefinition,
    consumables: ConsumableStatus,
    date: dt.date,
    rng: RngRegistry,
) -> TreatmentOutcome:
    """Resolve one delivered appointment for a true carrier.

    The diagnostic fires first: with probability (1 - sensitivity) the
    case is missed and nothing happens.  A detected case is cured with
    cure_probability, scaled by partial_effect when only the optional
    consumables were missing.  A cure clears the condition.
    """
    spec = defn.treatment
    if spec is None:
        raise ValueError(f"disease {defn.id!r} has no treatment")
    state_arr = pop.conditions[defn.id]
    if state_arr[person] < 0:
        raise ValueError(f"person {person} does not carry {defn.id!r}")
    stream = rng.stream(f"treatment:{defn.id}")
    if stream.uniform(person, date, index=0) >= spec.diagnostic_sensitivity:
        return TreatmentOutcome.FALSE_NEGATIVE_NO_TREATMENT
    p_cure = spec.cure_probability
    if consumables is ConsumableStatus.PARTIAL:
        p_cure *= spec.partial_effect
    if stream.uniform(person, date, index=1) < p_cure:
        state_arr[person] = -1
        return TreatmentOutcome.CURED
    return TreatmentOutcome.NOT_CURED


def disability_weights(pop: Population, definitions) -> np.ndarray:
    """Per-disease matrix of current disability weights, 0 for non-carriers."""
    n = len(pop)
    dw = np.zeros((len(definitions), n))
    for j, defn in enumerate(definitions):
        state_arr = pop.conditions[defn.id]
        weights = np.array([s.disability_weight for s in defn.states])
        mask = state_arr >= 0
        dw[j, mask] = weights[state_arr[mask]]
    return dw
