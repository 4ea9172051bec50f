"""Demand generation: symptoms turned into appointment requests.

Whether a symptomatic person initiates care on a given day is a
Bernoulli draw whose probability combines a per-symptom base rate with
multiplicative odds ratios for wealth, education, residence and district
remoteness on the log-odds scale.  While a person stays symptomatic and
unserved they re-draw every day; an open request blocks duplicates for
the same (person, disease) until it is delivered, expires or is
cancelled.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .disease import DiseaseDefinition
from .health_system import HsiEvent
from .population import EDUCATION_LABELS, RESIDENCE_LABELS, Population
from .rng import RngRegistry


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def _expit(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@dataclass(frozen=True)
class SeekingModel:
    """Care-seeking propensities: base daily probability per symptom plus
    odds-ratio modifiers over socioeconomic attributes.

    Missing odds-ratio keys default to 1 (no effect); remoteness classes
    referenced by districts must be present, which config validation
    enforces.
    """

    base_probability: Mapping[str, float]
    wealth_odds: Mapping[int, float]
    education_odds: Mapping[str, float]
    residence_odds: Mapping[str, float]
    remoteness_odds: Mapping[str, float]

    def attribute_log_odds(self, wealth: int, education: str, residence: str, remoteness: str) -> float:
        total = 0.0
        total += math.log(self.wealth_odds.get(wealth, 1.0))
        total += math.log(self.education_odds.get(education, 1.0))
        total += math.log(self.residence_odds.get(residence, 1.0))
        total += math.log(self.remoteness_odds.get(remoteness, 1.0))
        return total


def seek_probability(model: SeekingModel, symptom: str, person, remoteness: str) -> float:
    """Daily probability that `person` initiates care for `symptom`.

    Log-odds additive: logit(base) plus the log odds ratios for the
    person's attribute values, squashed back through the logistic.
    """
    base = model.base_probability[symptom]
    shift = model.attribute_log_odds(
        person.wealth_quintile, person.education, person.residence, remoteness
    )
    return _expit(_logit(base) + shift)


def attribute_log_odds_vector(
    model: SeekingModel, pop: Population, remoteness_by_district: Sequence[str]
) -> np.ndarray:
    """Per-person attribute log-odds shift (symptom-independent)."""
    lw = np.array([math.log(model.wealth_odds.get(q, 1.0)) for q in range(1, 6)])
    le = np.array([math.log(model.education_odds.get(lbl, 1.0)) for lbl in EDUCATION_LABELS])
    lr = np.array([math.log(model.residence_odds.get(lbl, 1.0)) for lbl in RESIDENCE_LABELS])
    ld = np.array([math.log(model.remoteness_odds.get(r, 1.0)) for r in remoteness_by_district])
    return (
        lw[pop.wealth_quintile - 1]
        + le[pop.education]
        + lr[pop.residence]
        + ld[pop.district]
    )


def generate_hsi(
    pop: Population,
    person: int,
    date: dt.date,
    model: SeekingModel,
    definitions: Sequence[DiseaseDefinition],
    open_hsi: Mapping[str, np.ndarray],
    rng: RngRegistry,
    *,
    symptom_index: Mapping[str, int],
    remoteness_by_district: Sequence[str],
    facility_of,
    patience_days: int,
    next_seq,
) -> list[HsiEvent]:
    """Daily seeking draws for one person; returns newly opened requests.

    Each current symptom gets one Bernoulli draw keyed by (person, date,
    symptom); a success opens a request for every disease currently
    emitting that symptom that is treatable and has no open request for
    this person.  `facility_of(district_idx, level)` resolves routing and
    `next_seq()` hands out queue sequence numbers.
    """
    if not pop.alive[person]:
        return []
    view = pop.person(person, definitions)
    if not view.symptoms:
        return []
    stream = rng.stream("seeking")
    shift = model.attribute_log_odds(
        int(pop.wealth_quintile[person]),
        EDUCATION_LABELS[pop.education[person]],
        RESIDENCE_LABELS[pop.residence[person]],
        remoteness_by_district[pop.district[person]],
    )
    events: list[HsiEvent] = []
    for symptom in sorted(view.symptoms, key=symptom_index.__getitem__):
        p = _expit(_logit(model.base_probability[symptom]) + shift)
        if stream.uniform(person, date, index=symptom_index[symptom]) >= p:
            continue
        for defn in definitions:
            if defn.treatment is None or open_hsi[defn.id][person]:
                continue
            state = pop.conditions[defn.id][person]
            if state < 0 or symptom not in defn.states[state].symptoms:
                continue
            open_hsi[defn.id][person] = True
            events.append(
                _make_event(pop, person, defn, date, patience_days, facility_of, next_seq())
            )
    return events


def generate_hsi_day(
    pop: Population,
    date: dt.date,
    model: SeekingModel,
    definitions: Sequence[DiseaseDefinition],
    open_hsi: Mapping[str, np.ndarray],
    rng: RngRegistry,
    *,
    symptom_index: Mapping[str, int],
    remoteness_by_district: Sequence[str],
    facility_of,
    patience_days: int,
    next_seq,
) -> list[HsiEvent]:
    """Vectorized seeking pass over the whole population.

    Draws are keyed per (person, date, symptom) exactly as in
    `generate_hsi`; events are created symptom-major, persons ascending,
    so sequence numbers are deterministic.
    """
    n = len(pop)
    if n == 0:
        return []
    stream = rng.stream("seeking")
    shift = attribute_log_odds_vector(model, pop, remoteness_by_district)
    events: list[HsiEvent] = []

    # symptom -> diseases whose current state emits it, resolved per person
    for symptom, s_idx in symptom_index.items():
        emitting: list[tuple[DiseaseDefinition, np.ndarray]] = []
        for defn in definitions:
            if defn.treatment is None:
                continue
            state_arr = pop.conditions[defn.id]
            emits = np.array([symptom in s.symptoms for s in defn.states])
            mask = pop.alive & (state_arr >= 0)
            mask &= emits[np.maximum(state_arr, 0)] & ~open_hsi[defn.id]
            if mask.any():
                emitting.append((defn, mask))
        if not emitting:
            continue
        candidates = np.zeros(n, dtype=bool)
        for _, mask in emitting:
            candidates |= mask
        base_logit = _logit(model.base_probability[symptom])
        ids = np.nonzero(candidates)[0]
        p = 1.0 / (1.0 + np.exp(-(base_logit + shift[ids])))
        u = stream.uniforms_for(ids.astype(np.uint64), date, index=s_idx)
        sought = ids[u < p]
        if sought.size == 0:
            continue
        sought_mask = np.zeros(n, dtype=bool)
        sought_mask[sought] = True
        for defn, mask in emitting:
            for person in np.nonzero(mask & sought_mask)[0]:
                if open_hsi[defn.id][person]:
                    continue
                open_hsi[defn.id][person] = True
                events.append(
                    _make_event(pop, int(person), defn, date, patience_days, facility_of, next_seq())
                )
    return events


def _make_event(
    pop: Population,
    person: int,
    defn: DiseaseDefinition,
    date: dt.date,
    patience_days: int,
    facility_of,
    seq: int,
) -> HsiEvent:
    spec = defn.treatment
    today = date.toordinal()
    return HsiEvent(
        person=person,
        disease=defn.id,
        footprint=spec.footprint,
        essential_consumables=tuple(sorted(spec.essential_consumables)),
        optional_consumables=tuple(sorted(spec.optional_consumables)),
        priority=spec.priority,
        facility_level=spec.facility_level,
        facility=facility_of(int(pop.district[person]), spec.facility_level),
        earliest_ordinal=today,
        expiry_ordinal=today + patience_days,
        sequence_number=seq,
    )
