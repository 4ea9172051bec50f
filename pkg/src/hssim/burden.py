"""Disability-adjusted life year accounting.

Years lived with disability accrue daily for every alive person from the
disability weights of their current condition states; comorbidity is
combined multiplicatively, 1 - prod(1 - w), and the combined value is
attributed back to causes in proportion to their individual weights.
Years of life lost are charged once at death from the residual life
expectancy for the person's age and sex.  No discounting, no age
weighting.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .disease import disability_weights
from .population import DAYS_PER_YEAR, LifeTable, Population

BACKGROUND_CAUSE_LABEL = "background"


@dataclass(frozen=True)
class DalyRecord:
    """Burden attributed to one cause in one calendar year, in years."""

    year: int
    cause: str
    yld: float
    yll: float

    @property
    def daly(self) -> float:
        return self.yld + self.yll


def combined_disability_weight(weights: Iterable[float]) -> float:
    """Multiplicative comorbidity combination, 1 - prod(1 - w)."""
    product = 1.0
    for w in weights:
        if not 0.0 <= w <= 1.0:
            raise ValueError("disability weight outside [0, 1]")
        product *= 1.0 - w
    return 1.0 - product


def accrue_yld(pop: Population, person: int, definitions: Sequence) -> dict[str, float]:
    """One day of YLD for one alive person, split by cause.

    Returns disease id -> years; the values sum to the combined weight
    over 365.25.  Empty when the person carries nothing.
    """
    if not pop.alive[person]:
        raise ValueError(f"person {person} is dead")
    weights: dict[str, float] = {}
    for defn in definitions:
        state = pop.conditions[defn.id][person]
        if state >= 0:
            w = defn.states[state].disability_weight
            if w > 0.0:
                weights[defn.id] = w
    if not weights:
        return {}
    combined = combined_disability_weight(weights.values())
    total_w = sum(weights.values())
    day = combined / DAYS_PER_YEAR
    return {cause: day * w / total_w for cause, w in weights.items()}


def accrue_yld_day(pop: Population, definitions: Sequence) -> np.ndarray:
    """One day of YLD for the whole population, per disease, in years.

    Same attribution rule as `accrue_yld`, vectorized: combined weight
    per person, split proportionally to individual weights.
    """
    dw = disability_weights(pop, definitions)
    dw[:, ~pop.alive] = 0.0
    total_w = dw.sum(axis=0)
    carriers = total_w > 0.0
    if not carriers.any():
        return np.zeros(len(definitions))
    combined = 1.0 - np.prod(1.0 - dw[:, carriers], axis=0)
    share = dw[:, carriers] / total_w[carriers]
    return (share * combined).sum(axis=1) / DAYS_PER_YEAR


def yll_on_death(pop: Population, person: int, date: dt.date, life_table: LifeTable) -> float:
    """Years of life lost for a death on `date`: residual expectancy at
    the age reached, by sex."""
    age = (date.toordinal() - int(pop.dob_ordinal[person])) / DAYS_PER_YEAR
    return life_table.expectancy(age, int(pop.sex[person]))


def total_by_cause(records: Iterable[DalyRecord]) -> dict[str, float]:
    totals: dict[str, float] = {}
    for rec in records:
        totals[rec.cause] = totals.get(rec.cause, 0.0) + rec.daly
    return totals


@dataclass(frozen=True)
class AvertedReport:
    """Pairwise burden comparison, baseline minus comparator."""

    baseline_total: float
    comparator_total: float
    by_cause: Mapping[str, float]

    @property
    def total_averted(self) -> float:
        return self.baseline_total - self.comparator_total

    @property
    def percent_of_baseline(self) -> float:
        if self.baseline_total == 0.0:
            return 0.0
        return 100.0 * self.total_averted / self.baseline_total


def dalys_averted(baseline, comparator) -> AvertedReport:
    """Compare two runs of the same population under the same seed.

    Refuses to compare runs whose population setup, horizon or master
    seed differ; those comparisons would confound scenario effects with
    sampling noise.
    """
    if baseline.population_fingerprint != comparator.population_fingerprint:
        raise ValueError("runs draw from different population setups")
    if (baseline.horizon_start, baseline.horizon_end) != (
        comparator.horizon_start,
        comparator.horizon_end,
    ):
        raise ValueError("runs cover different horizons")
    if baseline.master_seed != comparator.master_seed:
        raise ValueError("runs use different master seeds")
    base = total_by_cause(baseline.daly_records)
    comp = total_by_cause(comparator.daly_records)
    causes = sorted(set(base) | set(comp))
    by_cause = {c: base.get(c, 0.0) - comp.get(c, 0.0) for c in causes}
    return AvertedReport(
        baseline_total=sum(base.values()),
        comparator_total=sum(comp.values()),
        by_cause=by_cause,
    )
