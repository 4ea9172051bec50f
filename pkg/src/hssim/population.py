"""Synthetic population: initialization, births, background deaths, ageing.

State is stored column-wise in numpy arrays; the row index IS the person
id, ids are dense and never reused, and dead persons keep their row with
``alive`` cleared.  ``Person`` is a read-only row view used for
snapshots and tests.  Socioeconomic attributes are fixed at birth.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .rng import RngRegistry

FEMALE, MALE = 0, 1
URBAN, RURAL = 0, 1
EDU_NONE, EDU_PRIMARY, EDU_SECONDARY = 0, 1, 2

SEX_LABELS = ("female", "male")
RESIDENCE_LABELS = ("urban", "rural")
EDUCATION_LABELS = ("none", "primary", "secondary+")

DAYS_PER_YEAR = 365.25
ADULT_AGE_YEARS = 15.0

#: cause_of_death code for deaths not attributed to any modelled disease
BACKGROUND_CAUSE = 0


@dataclass(frozen=True)
class Person:
    """Row snapshot of one simulated individual."""

    id: int
    date_of_birth: dt.date
    sex: str
    alive: bool
    district: str
    residence: str
    wealth_quintile: int
    education: str
    conditions: dict  # disease id -> state index
    symptoms: frozenset


@dataclass(frozen=True)
class DistrictSpec:
    id: str
    share: float
    urban_share: float
    remoteness: str  # class label resolved by the seeking model


@dataclass(frozen=True)
class AgeBand:
    lower: float  # years, inclusive
    upper: float  # years, exclusive
    share: float


@dataclass(frozen=True)
class PopulationSpec:
    size: int
    age_bands: tuple[AgeBand, ...]
    sex_ratio_female: float
    districts: tuple[DistrictSpec, ...]
    wealth_shares: tuple[float, float, float, float, float]
    education_shares: tuple[float, float, float]  # none, primary, secondary+


@dataclass(frozen=True)
class LifeTable:
    """Remaining life expectancy (years) by age band and sex.

    ``band_lower_ages`` are ascending band starts beginning at 0; ages at
    or beyond the last band use the terminal entry.
    """

    band_lower_ages: tuple[float, ...]
    female: tuple[float, ...]
    male: tuple[float, ...]

    def __post_init__(self):
        lows = self.band_lower_ages
        if not lows or lows[0] != 0 or any(b <= a for a, b in zip(lows, lows[1:])):
            raise ValueError("life table bands must ascend from age 0")
        if len(self.female) != len(lows) or len(self.male) != len(lows):
            raise ValueError("life table needs one entry per band and sex")
        for col in (self.female, self.male):
            if any(e <= 0 for e in col):
                raise ValueError("life expectancies must be > 0")
            if any(b >= a for a, b in zip(col, col[1:])):
                raise ValueError("life expectancy must strictly decrease with age")

    def expectancy(self, age_years: float, sex: int) -> float:
        band = int(np.searchsorted(self.band_lower_ages, age_years, side="right")) - 1
        band = max(band, 0)
        col = self.female if sex == FEMALE else self.male
        return col[band]


@dataclass(frozen=True)
class DemographyRates:
    """Flat daily birth/death hazards driving the population denominator."""

    crude_birth_hazard_per_day: float
    mortality_band_lower_ages: tuple[float, ...]
    mortality_female_per_day: tuple[float, ...]
    mortality_male_per_day: tuple[float, ...]


ZERO_RATES = DemographyRates(0.0, (0.0,), (0.0,), (0.0,))


class Population:
    """Columnar store for every person ever created in a run."""

    def __init__(self):
        self.dob_ordinal = np.empty(0, dtype=np.int64)
        self.sex = np.empty(0, dtype=np.int8)
        self.alive = np.empty(0, dtype=bool)
        self.district = np.empty(0, dtype=np.int16)
        self.residence = np.empty(0, dtype=np.int8)
        self.wealth_quintile = np.empty(0, dtype=np.int8)
        self.education = np.empty(0, dtype=np.int8)
        # disease id -> per-person current state index, -1 when not carried
        self.conditions: dict[str, np.ndarray] = {}
        # -1 alive/never died; BACKGROUND_CAUSE or 1 + disease index otherwise
        self.cause_of_death = np.empty(0, dtype=np.int16)
        self.district_ids: tuple[str, ...] = ()

    def __len__(self) -> int:
        return self.dob_ordinal.shape[0]

    def alive_count(self) -> int:
        return int(self.alive.sum())

    def ages_years(self, date: dt.date) -> np.ndarray:
        return (date.toordinal() - self.dob_ordinal) / DAYS_PER_YEAR

    def register_disease(self, disease_id: str) -> None:
        if disease_id in self.conditions:
            raise ValueError(f"disease {disease_id!r} registered twice")
        self.conditions[disease_id] = np.full(len(self), -1, dtype=np.int8)

    def append(self, dob_ordinal, sex, district, residence, wealth, education) -> int:
        """Add one person; returns the new id."""
        self.dob_ordinal = np.append(self.dob_ordinal, np.int64(dob_ordinal))
        self.sex = np.append(self.sex, np.int8(sex))
        self.alive = np.append(self.alive, True)
        self.district = np.append(self.district, np.int16(district))
        self.residence = np.append(self.residence, np.int8(residence))
        self.wealth_quintile = np.append(self.wealth_quintile, np.int8(wealth))
        self.education = np.append(self.education, np.int8(education))
        self.cause_of_death = np.append(self.cause_of_death, np.int16(-1))
        for arr_name, arr in self.conditions.items():
            self.conditions[arr_name] = np.append(arr, np.int8(-1))
        return len(self) - 1

    def person(self, i: int, definitions: Optional[Sequence] = None) -> Person:
        conditions = {d: int(arr[i]) for d, arr in self.conditions.items() if arr[i] >= 0}
        symptoms: set[str] = set()
        if definitions is not None:
            by_id = {d.id: d for d in definitions}
            for disease_id, state_idx in conditions.items():
                symptoms |= by_id[disease_id].states[state_idx].symptoms
        return Person(
            id=i,
            date_of_birth=dt.date.fromordinal(int(self.dob_ordinal[i])),
            sex=SEX_LABELS[self.sex[i]],
            alive=bool(self.alive[i]),
            district=self.district_ids[self.district[i]] if self.district_ids else str(self.district[i]),
            residence=RESIDENCE_LABELS[self.residence[i]],
            wealth_quintile=int(self.wealth_quintile[i]),
            education=EDUCATION_LABELS[self.education[i]],
            conditions=conditions,
            symptoms=frozenset(symptoms),
        )


def _categorical(u: np.ndarray, shares: Sequence[float]) -> np.ndarray:
    edges = np.cumsum(np.asarray(shares, dtype=float))
    edges[-1] = 1.0  # guard rounding so u just below 1 stays in range
    return np.searchsorted(edges, u, side="right").astype(np.int64)


def initialize_population(spec: PopulationSpec, start_date: dt.date, rng: RngRegistry) -> Population:
    """Sample the starting population; ids are dense 0..size-1.

    Marginal attribute distributions match ``spec``'s shares up to sampling error.
    Distribution shares are assumed validated (summing to 1) upstream.
    """
    pop = Population()
    pop.district_ids = tuple(d.id for d in spec.districts)
    n = spec.size
    stream = rng.stream("demography:init")
    if n == 0:
        return pop

    band_idx = _categorical(stream.uniforms(n, 0, index=0), [b.share for b in spec.age_bands])
    lowers = np.array([b.lower for b in spec.age_bands])
    uppers = np.array([b.upper for b in spec.age_bands])
    age_years = lowers[band_idx] + stream.uniforms(n, 0, index=1) * (uppers - lowers)[band_idx]
    age_days = np.floor(age_years * DAYS_PER_YEAR).astype(np.int64)

    sex = np.where(stream.uniforms(n, 0, index=2) < spec.sex_ratio_female, FEMALE, MALE)
    district = _categorical(stream.uniforms(n, 0, index=3), [d.share for d in spec.districts])
    urban_share = np.array([d.urban_share for d in spec.districts])
    residence = np.where(stream.uniforms(n, 0, index=4) < urban_share[district], URBAN, RURAL)
    wealth = _categorical(stream.uniforms(n, 0, index=5), spec.wealth_shares) + 1
    education = _categorical(stream.uniforms(n, 0, index=6), spec.education_shares)

    pop.dob_ordinal = start_date.toordinal() - age_days
    pop.sex = sex.astype(np.int8)
    pop.alive = np.ones(n, dtype=bool)
    pop.district = district.astype(np.int16)
    pop.residence = residence.astype(np.int8)
    pop.wealth_quintile = wealth.astype(np.int8)
    pop.education = education.astype(np.int8)
    pop.cause_of_death = np.full(n, -1, dtype=np.int16)
    return pop


def _mortality_per_day(rates: DemographyRates, ages: np.ndarray, sex: np.ndarray) -> np.ndarray:
    band = np.searchsorted(rates.mortality_band_lower_ages, ages, side="right") - 1
    band = np.maximum(band, 0)
    female = np.asarray(rates.mortality_female_per_day)
    male = np.asarray(rates.mortality_male_per_day)
    return np.where(sex == FEMALE, female[band], male[band])


def demography_step(
    pop: Population, rates: DemographyRates, date: dt.date, rng: RngRegistry
) -> tuple[list[int], list[int]]:
    """One day of births and background deaths.

    Returns (ids of newborns, ids of background deaths).  Everyone alive
    at the start of the day draws a birth trigger at the daily crude
    rate; newborns inherit district, residence and wealth from a
    randomly selected living adult female when one exists, otherwise
    they draw from the day's population distribution.  Deaths are
    per-person Bernoulli draws from the age/sex hazard, applied before
    mothers are selected so a newborn is never attributed to the dead.
    """
    n = len(pop)
    if n == 0:
        return [], []
    alive_at_start = pop.alive.copy()
    ages = pop.ages_years(date)

    hazard = _mortality_per_day(rates, ages, pop.sex)
    p_death = -np.expm1(-hazard)
    u_death = rng.stream("demography:death").uniforms(n, date)
    died = alive_at_start & (u_death < p_death)
    dead_ids = np.nonzero(died)[0]
    pop.alive[dead_ids] = False
    pop.cause_of_death[dead_ids] = BACKGROUND_CAUSE

    p_birth = -np.expm1(-rates.crude_birth_hazard_per_day)
    births = 0
    if p_birth > 0:
        u_birth = rng.stream("demography:birth").uniforms(n, date)
        births = int((alive_at_start & (u_birth < p_birth)).sum())

    born_ids: list[int] = []
    if births:
        mothers = np.nonzero(pop.alive & (ages >= ADULT_AGE_YEARS) & (pop.sex == FEMALE))[0]
        newborn_stream = rng.stream("demography:newborn")
        dob = date.toordinal()
        for _ in range(births):
            new_id = len(pop)
            sex = FEMALE if newborn_stream.uniform(new_id, date, index=0) < 0.5 else MALE
            if mothers.size:
                pick = int(newborn_stream.uniform(new_id, date, index=1) * mothers.size)
                m = int(mothers[min(pick, mothers.size - 1)])
                district = pop.district[m]
                residence = pop.residence[m]
                wealth = pop.wealth_quintile[m]
            else:
                live = np.nonzero(pop.alive)[0]
                if live.size:
                    pick = int(newborn_stream.uniform(new_id, date, index=2) * live.size)
                    src = int(live[min(pick, live.size - 1)])
                    district = pop.district[src]
                    residence = pop.residence[src]
                    wealth = pop.wealth_quintile[src]
                else:
                    district, residence, wealth = 0, RURAL, 3
            born_ids.append(pop.append(dob, sex, district, residence, wealth, EDU_NONE))
    return born_ids, list(map(int, dead_ids))
