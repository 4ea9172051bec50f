"""Shared builders for the test suite."""

import copy
import datetime as dt

import numpy as np
import pytest

from hssim.population import Population

START = dt.date(2030, 1, 1)


def build_population(
    n,
    *,
    start=START,
    age_years=30.0,
    district=0,
    n_districts=1,
    sex=None,
    wealth=3,
    education=1,
    residence=1,
):
    """Population with fully controlled attributes, no RNG involved."""
    pop = Population()
    pop.district_ids = tuple(f"d{i}" for i in range(n_districts))
    ages = np.broadcast_to(np.asarray(age_years, dtype=float), (n,))
    pop.dob_ordinal = (start.toordinal() - np.floor(ages * 365.25)).astype(np.int64)
    if sex is None:
        pop.sex = (np.arange(n) % 2).astype(np.int8)
    else:
        pop.sex = np.broadcast_to(np.asarray(sex, dtype=np.int8), (n,)).copy()
    pop.alive = np.ones(n, dtype=bool)
    pop.district = np.broadcast_to(np.asarray(district, dtype=np.int16), (n,)).copy()
    pop.residence = np.broadcast_to(np.asarray(residence, dtype=np.int8), (n,)).copy()
    pop.wealth_quintile = np.broadcast_to(np.asarray(wealth, dtype=np.int8), (n,)).copy()
    pop.education = np.broadcast_to(np.asarray(education, dtype=np.int8), (n,)).copy()
    pop.cause_of_death = np.full(n, -1, dtype=np.int16)
    return pop


MINIMAL_DOC = {
    "name": "unit",
    "mode": 2,
    "horizon": {"start": "2030-01-01", "end": "2030-01-31"},
    "patience_days": 3,
    "cadres": ["nurse"],
    "consumable_items": ["kit"],
    "population": {
        "size": 50,
        "sex_ratio_female": 0.5,
        "age_bands": [{"lower": 0, "upper": 80, "share": 1.0}],
        "wealth_shares": [0.2, 0.2, 0.2, 0.2, 0.2],
        "education_shares": [0.4, 0.4, 0.2],
        "districts": [
            {"id": "d0", "share": 1.0, "urban_share": 0.5, "remoteness": "near"}
        ],
    },
    "demography": {
        "crude_birth_rate_per_1000_per_year": 0.0,
        "mortality": {
            "band_lower_ages": [0],
            "female_per_year": [0.0],
            "male_per_year": [0.0],
        },
    },
    "life_table": {
        "band_lower_ages": [0, 50],
        "female_expectancy": [60.0, 20.0],
        "male_expectancy": [58.0, 18.0],
    },
    "diseases": [
        {
            "id": "flu",
            "incidence": {"base_hazard_per_day": 0.01},
            "states": [
                {
                    "name": "ill",
                    "disability_weight": 0.2,
                    "death_hazard_per_day": 0.001,
                    "progression_per_day": {},
                    "recovery_per_day": 0.05,
                    "symptoms": ["cough"],
                }
            ],
            "treatment": {
                "footprint_minutes": {"nurse": 10},
                "essential_consumables": ["kit"],
                "optional_consumables": [],
                "priority": 0,
                "facility_level": "1a",
                "diagnostic_sensitivity": 0.9,
                "cure_probability": 0.8,
            },
        }
    ],
    "seeking": {
        "base_probability": {"cough": 0.1},
        "odds_ratios": {"remoteness": {"near": 1.0}},
    },
    "facilities": [
        {
            "district": "d0",
            "level": "1a",
            "ownership": "public",
            "staff_count": {"nurse": 1},
            "minutes_per_day": {"nurse": 120},
            "consumable_availability": {"kit": 1.0},
        }
    ],
}


@pytest.fixture
def base_doc():
    return copy.deepcopy(MINIMAL_DOC)
