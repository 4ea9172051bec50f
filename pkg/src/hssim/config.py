"""Scenario configuration: JSON in, validated typed model out.

Validation collects every problem in one pass and reports them all with
JSON-style paths, so a config author fixes a file in one round trip
instead of replaying the simulation against one error at a time.  A
`ScenarioConfig` is only ever constructed from a document that passed
validation; downstream code can assume every cross-reference resolves.

Units at the config surface: demography is annual (births per 1000 per
year, deaths per person-year), life expectancy is in years, disease
dynamics are daily (hazards per day, transition probabilities per day),
worker time is in minutes per day.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from .disease import DiseaseDefinition, DiseaseState, IncidenceModel, TreatmentSpec
from .health_seeking import SeekingModel
from .health_system import FACILITY_LEVELS, FacilityGroup, OWNERSHIP_CATEGORIES
from .population import (
    AgeBand,
    DemographyRates,
    DistrictSpec,
    DAYS_PER_YEAR,
    EDUCATION_LABELS,
    LifeTable,
    PopulationSpec,
    RESIDENCE_LABELS,
)
from .production import AppointmentFootprint, CapacityShifters

_SHARE_TOL = 1e-6

_TOP_LEVEL_KEYS = {
    "name",
    "mode",
    "horizon",
    "patience_days",
    "cadres",
    "consumable_items",
    "population",
    "demography",
    "life_table",
    "diseases",
    "seeking",
    "facilities",
}


class ConfigError(ValueError):
    """Raised for an invalid scenario document; carries every finding."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid scenario config:\n" + "\n".join(f"  {e}" for e in errors))


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def fingerprint(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario, safe to hand to the engine."""

    name: str
    mode: int
    start: dt.date
    end: dt.date
    patience_days: int
    cadres: tuple[str, ...]
    items: tuple[str, ...]
    population: PopulationSpec
    demography: DemographyRates
    life_table: LifeTable
    diseases: tuple[DiseaseDefinition, ...]
    seeking: SeekingModel
    facilities: tuple[FacilityGroup, ...]
    symptom_index: Mapping[str, int]
    facility_index: Mapping[tuple[int, str], int]  # (district idx, level) -> facility
    remoteness_by_district: tuple[str, ...]
    raw: Mapping[str, Any]
    config_fingerprint: str
    population_fingerprint: str

    @property
    def n_days(self) -> int:
        return self.end.toordinal() - self.start.toordinal() + 1


class _Checker:
    """Accumulates validation findings as 'path: message' strings."""

    def __init__(self) -> None:
        self.errors: list[str] = []

    def fail(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def req(self, doc: Mapping, key: str, path: str) -> Any:
        if key not in doc:
            self.fail(f"{path}.{key}" if path else key, "missing")
            return None
        return doc[key]

    def number(self, value: Any, path: str, lo: float = -math.inf, hi: float = math.inf,
               *, lo_open: bool = False, hi_open: bool = False) -> Optional[float]:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            self.fail(path, "must be a number")
            return None
        v = float(value)
        if not math.isfinite(v):
            self.fail(path, "must be finite")
            return None
        if v < lo or (lo_open and v == lo) or v > hi or (hi_open and v == hi):
            left = "(" if lo_open else "["
            right = ")" if hi_open else "]"
            self.fail(path, f"must be in {left}{lo}, {hi}{right}")
            return None
        return v

    def integer(self, value: Any, path: str, lo: int = 0) -> Optional[int]:
        if not isinstance(value, int) or isinstance(value, bool):
            self.fail(path, "must be an integer")
            return None
        if value < lo:
            self.fail(path, f"must be >= {lo}")
            return None
        return value

    def string(self, value: Any, path: str) -> Optional[str]:
        if not isinstance(value, str) or not value:
            self.fail(path, "must be a non-empty string")
            return None
        return value

    def date(self, value: Any, path: str) -> Optional[dt.date]:
        if not isinstance(value, str):
            self.fail(path, "must be an ISO date string")
            return None
        try:
            return dt.date.fromisoformat(value)
        except ValueError:
            self.fail(path, f"not an ISO date: {value!r}")
            return None

    def shares(self, value: Any, path: str, expected_len: Optional[int] = None) -> bool:
        if not isinstance(value, list) or (expected_len is not None and len(value) != expected_len):
            want = f" of length {expected_len}" if expected_len is not None else ""
            self.fail(path, f"must be a list{want}")
            return False
        ok = all(self.number(v, f"{path}[{i}]", 0.0, 1.0) is not None for i, v in enumerate(value))
        if ok and abs(sum(value) - 1.0) > _SHARE_TOL:
            self.fail(path, f"shares must sum to 1, got {sum(value)}")
            return False
        return ok

    def bands(self, value: Any, path: str) -> bool:
        if not isinstance(value, list) or not value:
            self.fail(path, "must be a non-empty list")
            return False
        if self.number(value[0], f"{path}[0]") != 0.0:
            self.fail(path, "must start at age 0")
            return False
        ok = True
        for i in range(1, len(value)):
            if self.number(value[i], f"{path}[{i}]", 0.0) is None or value[i] <= value[i - 1]:
                self.fail(f"{path}[{i}]", "band ages must strictly ascend")
                ok = False
        return ok


def _validate_seeking(c: _Checker, doc: Mapping, symptoms_emitted: set[str]) -> None:
    seeking = c.req(doc, "seeking", "")
    if not isinstance(seeking, Mapping):
        if seeking is not None:
            c.fail("seeking", "must be an object")
        return
    base = seeking.get("base_probability")
    if not isinstance(base, Mapping) or not base:
        c.fail("seeking.base_probability", "must be a non-empty object")
    else:
        for sym, p in base.items():
            c.number(p, f"seeking.base_probability[{sym!r}]", 0.0, 1.0, lo_open=True, hi_open=True)
        for sym in sorted(symptoms_emitted - set(base)):
            c.fail("seeking.base_probability", f"no entry for emitted symptom {sym!r}")
    odds = seeking.get("odds_ratios", {})
    if not isinstance(odds, Mapping):
        c.fail("seeking.odds_ratios", "must be an object")
        return
    for group, valid_keys in (
        ("wealth_quintile", {"1", "2", "3", "4", "5"}),
        ("education", set(EDUCATION_LABELS)),
        ("residence", set(RESIDENCE_LABELS)),
        ("remoteness", None),
    ):
        table = odds.get(group, {})
        if not isinstance(table, Mapping):
            c.fail(f"seeking.odds_ratios.{group}", "must be an object")
            continue
        for key, ratio in table.items():
            if valid_keys is not None and key not in valid_keys:
                c.fail(f"seeking.odds_ratios.{group}", f"unknown key {key!r}")
            c.number(ratio, f"seeking.odds_ratios.{group}[{key!r}]", 0.0, lo_open=True)


def _validate_disease(c: _Checker, entry: Any, path: str, cadres: set[str], items: set[str]) -> None:
    if not isinstance(entry, Mapping):
        c.fail(path, "must be an object")
        return
    c.string(entry.get("id"), f"{path}.id")
    inc = entry.get("incidence")
    if not isinstance(inc, Mapping):
        c.fail(f"{path}.incidence", "must be an object")
    else:
        c.number(inc.get("base_hazard_per_day"), f"{path}.incidence.base_hazard_per_day", 0.0)
        if ("age_band_lower" in inc) != ("age_multipliers" in inc):
            c.fail(f"{path}.incidence", "age_band_lower and age_multipliers go together")
        elif "age_band_lower" in inc:
            if c.bands(inc["age_band_lower"], f"{path}.incidence.age_band_lower"):
                mults = inc["age_multipliers"]
                if not isinstance(mults, list) or len(mults) != len(inc["age_band_lower"]):
                    c.fail(f"{path}.incidence.age_multipliers", "length must match age_band_lower")
                else:
                    for i, m in enumerate(mults):
                        c.number(m, f"{path}.incidence.age_multipliers[{i}]", 0.0)
        for key in ("female_multiplier", "male_multiplier"):
            if key in inc:
                c.number(inc[key], f"{path}.incidence.{key}", 0.0)
    states = entry.get("states")
    if not isinstance(states, list) or not states:
        c.fail(f"{path}.states", "must be a non-empty list")
        return
    names = [s.get("name") for s in states if isinstance(s, Mapping)]
    if len(names) != len(set(names)):
        c.fail(f"{path}.states", "state names must be unique")
    for i, state in enumerate(states):
        spath = f"{path}.states[{i}]"
        if not isinstance(state, Mapping):
            c.fail(spath, "must be an object")
            continue
        c.string(state.get("name"), f"{spath}.name")
        c.number(state.get("disability_weight"), f"{spath}.disability_weight", 0.0, 1.0)
        hazard = c.number(state.get("death_hazard_per_day"), f"{spath}.death_hazard_per_day", 0.0)
        recovery = c.number(state.get("recovery_per_day", 0.0), f"{spath}.recovery_per_day", 0.0, 1.0)
        progression = state.get("progression_per_day", {})
        total_exit = (-math.expm1(-hazard) if hazard else 0.0) + (recovery or 0.0)
        if not isinstance(progression, Mapping):
            c.fail(f"{spath}.progression_per_day", "must be an object")
        else:
            for target, p in progression.items():
                if target not in names:
                    c.fail(f"{spath}.progression_per_day", f"unknown target state {target!r}")
                pv = c.number(p, f"{spath}.progression_per_day[{target!r}]", 0.0, 1.0)
                total_exit += pv or 0.0
        if total_exit > 1.0 + 1e-12:
            c.fail(spath, f"daily exit probabilities sum to {total_exit}, above 1")
        symptoms = state.get("symptoms", [])
        if not isinstance(symptoms, list):
            c.fail(f"{spath}.symptoms", "must be a list")
        else:
            for j, sym in enumerate(symptoms):
                c.string(sym, f"{spath}.symptoms[{j}]")
    treatment = entry.get("treatment")
    if treatment is None:
        return
    tpath = f"{path}.treatment"
    if not isinstance(treatment, Mapping):
        c.fail(tpath, "must be an object or null")
        return
    footprint = treatment.get("footprint_minutes")
    if not isinstance(footprint, Mapping) or not footprint:
        c.fail(f"{tpath}.footprint_minutes", "must be a non-empty object")
    else:
        any_positive = False
        for cadre, minutes in footprint.items():
            if cadre not in cadres:
                c.fail(f"{tpath}.footprint_minutes", f"unknown cadre {cadre!r}")
            m = c.number(minutes, f"{tpath}.footprint_minutes[{cadre!r}]", 0.0)
            any_positive = any_positive or bool(m)
        if not any_positive:
            c.fail(f"{tpath}.footprint_minutes", "needs at least one positive entry")
    essential = treatment.get("essential_consumables", [])
    optional = treatment.get("optional_consumables", [])
    for field_name, listed in (("essential_consumables", essential), ("optional_consumables", optional)):
        if not isinstance(listed, list):
            c.fail(f"{tpath}.{field_name}", "must be a list")
            continue
        for item in listed:
            if item not in items:
                c.fail(f"{tpath}.{field_name}", f"unknown consumable {item!r}")
    if isinstance(essential, list) and isinstance(optional, list):
        overlap = set(essential) & set(optional)
        if overlap:
            c.fail(tpath, f"consumables both essential and optional: {sorted(overlap)}")
    c.integer(treatment.get("priority"), f"{tpath}.priority", 0)
    if treatment.get("facility_level") not in FACILITY_LEVELS:
        c.fail(f"{tpath}.facility_level", f"must be one of {FACILITY_LEVELS}")
    for key, default in (
        ("diagnostic_sensitivity", None),
        ("diagnostic_specificity", 1.0),
        ("cure_probability", None),
        ("partial_effect", 1.0),
    ):
        value = treatment.get(key, default)
        if value is None:
            c.fail(f"{tpath}.{key}", "missing")
        else:
            c.number(value, f"{tpath}.{key}", 0.0, 1.0)


def _validate_facility(c: _Checker, entry: Any, path: str, cadres: set[str],
                       items: set[str], district_ids: set[str]) -> None:
    if not isinstance(entry, Mapping):
        c.fail(path, "must be an object")
        return
    district = entry.get("district")
    if district not in district_ids:
        c.fail(f"{path}.district", f"unknown district {district!r}")
    if entry.get("level") not in FACILITY_LEVELS:
        c.fail(f"{path}.level", f"must be one of {FACILITY_LEVELS}")
    if entry.get("ownership") not in OWNERSHIP_CATEGORIES:
        c.fail(f"{path}.ownership", f"must be one of {OWNERSHIP_CATEGORIES}")
    staff = entry.get("staff_count", {})
    minutes = entry.get("minutes_per_day", {})
    for field_name, table in (("staff_count", staff), ("minutes_per_day", minutes)):
        if not isinstance(table, Mapping):
            c.fail(f"{path}.{field_name}", "must be an object")
            continue
        for cadre, value in table.items():
            if cadre not in cadres:
                c.fail(f"{path}.{field_name}", f"unknown cadre {cadre!r}")
            if field_name == "staff_count":
                c.integer(value, f"{path}.staff_count[{cadre!r}]", 0)
            else:
                c.number(value, f"{path}.minutes_per_day[{cadre!r}]", 0.0)
    if isinstance(staff, Mapping) and isinstance(minutes, Mapping):
        for cadre in staff:
            if isinstance(staff.get(cadre), int) and staff[cadre] > 0 and cadre not in minutes:
                c.fail(f"{path}.minutes_per_day", f"no daily minutes for staffed cadre {cadre!r}")
    c.number(entry.get("absence_rate", 0.0), f"{path}.absence_rate", 0.0, 1.0, hi_open=True)
    c.number(entry.get("ownership_multiplier", 1.0), f"{path}.ownership_multiplier", 0.0, lo_open=True)
    c.number(entry.get("facility_scale_multiplier", 1.0), f"{path}.facility_scale_multiplier", 0.0, lo_open=True)
    avail = entry.get("consumable_availability", {})
    if not isinstance(avail, Mapping):
        c.fail(f"{path}.consumable_availability", "must be an object")
    else:
        for item, p in avail.items():
            if item not in items:
                c.fail(f"{path}.consumable_availability", f"unknown consumable {item!r}")
            c.number(p, f"{path}.consumable_availability[{item!r}]", 0.0, 1.0)
    if "bed_count" in entry:
        c.integer(entry["bed_count"], f"{path}.bed_count", 0)


def validate_raw(doc: Any) -> list[str]:
    """Every problem in the document, each as 'path: message'."""
    c = _Checker()
    if not isinstance(doc, Mapping):
        return ["document must be a JSON object"]
    for key in doc:
        if key not in _TOP_LEVEL_KEYS:
            c.fail(key, "unknown key")
    if "name" in doc:
        c.string(doc["name"], "name")
    mode = c.req(doc, "mode", "")
    if mode is not None and mode not in (0, 1, 2):
        c.fail("mode", f"must be 0, 1 or 2, got {mode!r}")
    horizon = c.req(doc, "horizon", "")
    if isinstance(horizon, Mapping):
        start = c.date(horizon.get("start"), "horizon.start")
        end = c.date(horizon.get("end"), "horizon.end")
        if start and end and start > end:
            c.fail("horizon", "start is after end")
    elif horizon is not None:
        c.fail("horizon", "must be an object with start and end")
    if "patience_days" in doc:
        c.integer(doc["patience_days"], "patience_days", 0)

    cadres_raw = c.req(doc, "cadres", "")
    cadres: set[str] = set()
    if isinstance(cadres_raw, list) and cadres_raw:
        for i, cadre in enumerate(cadres_raw):
            if c.string(cadre, f"cadres[{i}]"):
                cadres.add(cadre)
        if len(cadres) != len(cadres_raw):
            c.fail("cadres", "must be unique")
    elif cadres_raw is not None:
        c.fail("cadres", "must be a non-empty list")
    items_raw = doc.get("consumable_items", [])
    items: set[str] = set()
    if isinstance(items_raw, list):
        for i, item in enumerate(items_raw):
            if c.string(item, f"consumable_items[{i}]"):
                items.add(item)
        if len(items) != len(items_raw):
            c.fail("consumable_items", "must be unique")
    else:
        c.fail("consumable_items", "must be a list")

    district_ids: set[str] = set()
    pop = c.req(doc, "population", "")
    if isinstance(pop, Mapping):
        c.integer(pop.get("size"), "population.size", 1)
        c.number(pop.get("sex_ratio_female"), "population.sex_ratio_female", 0.0, 1.0)
        bands = pop.get("age_bands")
        if not isinstance(bands, list) or not bands:
            c.fail("population.age_bands", "must be a non-empty list")
        else:
            total = 0.0
            prev_upper = 0.0
            for i, band in enumerate(bands):
                bpath = f"population.age_bands[{i}]"
                if not isinstance(band, Mapping):
                    c.fail(bpath, "must be an object")
                    continue
                lower = c.number(band.get("lower"), f"{bpath}.lower", 0.0)
                upper = c.number(band.get("upper"), f"{bpath}.upper", 0.0)
                share = c.number(band.get("share"), f"{bpath}.share", 0.0, 1.0)
                if lower is not None and upper is not None and upper <= lower:
                    c.fail(bpath, "upper must exceed lower")
                if lower is not None and lower != prev_upper:
                    c.fail(bpath, "bands must tile ages without gaps")
                prev_upper = upper if upper is not None else prev_upper
                total += share or 0.0
            if abs(total - 1.0) > _SHARE_TOL:
                c.fail("population.age_bands", f"shares must sum to 1, got {total}")
        c.shares(pop.get("wealth_shares"), "population.wealth_shares", 5)
        c.shares(pop.get("education_shares"), "population.education_shares", 3)
        districts = pop.get("districts")
        if not isinstance(districts, list) or not districts:
            c.fail("population.districts", "must be a non-empty list")
        else:
            total = 0.0
            for i, d in enumerate(districts):
                dpath = f"population.districts[{i}]"
                if not isinstance(d, Mapping):
                    c.fail(dpath, "must be an object")
                    continue
                did = c.string(d.get("id"), f"{dpath}.id")
                if did:
                    if did in district_ids:
                        c.fail(f"{dpath}.id", f"duplicate district {did!r}")
                    district_ids.add(did)
                share = c.number(d.get("share"), f"{dpath}.share", 0.0, 1.0)
                total += share or 0.0
                c.number(d.get("urban_share"), f"{dpath}.urban_share", 0.0, 1.0)
                c.string(d.get("remoteness"), f"{dpath}.remoteness")
            if abs(total - 1.0) > _SHARE_TOL:
                c.fail("population.districts", f"shares must sum to 1, got {total}")

    demo = c.req(doc, "demography", "")
    if isinstance(demo, Mapping):
        c.number(demo.get("crude_birth_rate_per_1000_per_year"),
                 "demography.crude_birth_rate_per_1000_per_year", 0.0)
        mort = demo.get("mortality")
        if not isinstance(mort, Mapping):
            c.fail("demography.mortality", "must be an object")
        elif c.bands(mort.get("band_lower_ages"), "demography.mortality.band_lower_ages"):
            n_bands = len(mort["band_lower_ages"])
            for col in ("female_per_year", "male_per_year"):
                rates = mort.get(col)
                if not isinstance(rates, list) or len(rates) != n_bands:
                    c.fail(f"demography.mortality.{col}", "length must match band_lower_ages")
                else:
                    for i, r in enumerate(rates):
                        c.number(r, f"demography.mortality.{col}[{i}]", 0.0)
    elif demo is not None:
        c.fail("demography", "must be an object")

    table = c.req(doc, "life_table", "")
    if isinstance(table, Mapping):
        if c.bands(table.get("band_lower_ages"), "life_table.band_lower_ages"):
            n_bands = len(table["band_lower_ages"])
            for col in ("female_expectancy", "male_expectancy"):
                entries = table.get(col)
                if not isinstance(entries, list) or len(entries) != n_bands:
                    c.fail(f"life_table.{col}", "length must match band_lower_ages")
                    continue
                for i, e in enumerate(entries):
                    c.number(e, f"life_table.{col}[{i}]", 0.0, lo_open=True)
                if all(isinstance(e, (int, float)) for e in entries) and any(
                    b >= a for a, b in zip(entries, entries[1:])
                ):
                    c.fail(f"life_table.{col}", "must strictly decrease with age")
    elif table is not None:
        c.fail("life_table", "must be an object")

    diseases = doc.get("diseases", [])
    symptoms_emitted: set[str] = set()
    disease_ids: list[str] = []
    if not isinstance(diseases, list):
        c.fail("diseases", "must be a list")
        diseases = []
    for i, entry in enumerate(diseases):
        _validate_disease(c, entry, f"diseases[{i}]", cadres, items)
        if isinstance(entry, Mapping):
            if isinstance(entry.get("id"), str):
                disease_ids.append(entry["id"])
            for state in entry.get("states", []) if isinstance(entry.get("states"), list) else []:
                if isinstance(state, Mapping) and isinstance(state.get("symptoms"), list):
                    symptoms_emitted.update(s for s in state["symptoms"] if isinstance(s, str))
    if len(disease_ids) != len(set(disease_ids)):
        c.fail("diseases", "disease ids must be unique")

    _validate_seeking(c, doc, symptoms_emitted)

    facilities = doc.get("facilities", [])
    facility_keys: set[tuple[str, str]] = set()
    if not isinstance(facilities, list):
        c.fail("facilities", "must be a list")
        facilities = []
    for i, entry in enumerate(facilities):
        _validate_facility(c, entry, f"facilities[{i}]", cadres, items, district_ids)
        if isinstance(entry, Mapping):
            key = (entry.get("district"), entry.get("level"))
            if key in facility_keys:
                c.fail(f"facilities[{i}]", f"duplicate facility group {key}")
            facility_keys.add(key)

    # Routing: every treatable disease must reach a facility of its level
    # in every district, with every footprint cadre and consumable known
    # to that facility.
    remoteness_classes = set()
    if isinstance(doc.get("seeking"), Mapping):
        odds = doc["seeking"].get("odds_ratios", {})
        if isinstance(odds, Mapping) and isinstance(odds.get("remoteness"), Mapping):
            remoteness_classes = set(odds["remoteness"])
    if isinstance(pop, Mapping) and isinstance(pop.get("districts"), list):
        for i, d in enumerate(pop["districts"]):
            if isinstance(d, Mapping) and isinstance(d.get("remoteness"), str):
                if remoteness_classes and d["remoteness"] not in remoteness_classes:
                    c.fail(f"population.districts[{i}].remoteness",
                           f"no odds ratio defined for class {d['remoteness']!r}")
    by_key = {
        (f.get("district"), f.get("level")): f
        for f in facilities
        if isinstance(f, Mapping)
    }
    for i, entry in enumerate(diseases):
        if not isinstance(entry, Mapping) or not isinstance(entry.get("treatment"), Mapping):
            continue
        t = entry["treatment"]
        level = t.get("facility_level")
        if level not in FACILITY_LEVELS:
            continue
        footprint = t.get("footprint_minutes", {})
        needed_items = []
        for field_name in ("essential_consumables", "optional_consumables"):
            if isinstance(t.get(field_name), list):
                needed_items.extend(t[field_name])
        for district in sorted(district_ids):
            fac = by_key.get((district, level))
            if fac is None:
                c.fail(f"diseases[{i}].treatment",
                       f"no level-{level} facility in district {district!r}")
                continue
            staff = fac.get("staff_count", {})
            if isinstance(footprint, Mapping) and isinstance(staff, Mapping):
                for cadre in footprint:
                    if cadre not in staff:
                        c.fail(f"diseases[{i}].treatment",
                               f"cadre {cadre!r} unknown to facility ({district!r}, {level!r})")
            avail = fac.get("consumable_availability", {})
            if isinstance(avail, Mapping):
                for item in needed_items:
                    if isinstance(item, str) and item not in avail:
                        c.fail(f"diseases[{i}].treatment",
                               f"no availability for {item!r} at facility ({district!r}, {level!r})")
    return c.errors


def _build_disease(entry: Mapping) -> DiseaseDefinition:
    inc = entry["incidence"]
    incidence = IncidenceModel(
        base_hazard_per_day=float(inc["base_hazard_per_day"]),
        age_band_lower=tuple(inc["age_band_lower"]) if "age_band_lower" in inc else None,
        age_multipliers=tuple(inc["age_multipliers"]) if "age_multipliers" in inc else None,
        female_multiplier=float(inc.get("female_multiplier", 1.0)),
        male_multiplier=float(inc.get("male_multiplier", 1.0)),
    )
    states = tuple(
        DiseaseState(
            name=s["name"],
            disability_weight=float(s["disability_weight"]),
            daily_death_hazard=float(s["death_hazard_per_day"]),
            progression={k: float(v) for k, v in s.get("progression_per_day", {}).items()},
            recovery_probability=float(s.get("recovery_per_day", 0.0)),
            symptoms=frozenset(s.get("symptoms", [])),
        )
        for s in entry["states"]
    )
    treatment = None
    if entry.get("treatment") is not None:
        t = entry["treatment"]
        treatment = TreatmentSpec(
            footprint=AppointmentFootprint(
                {k: float(v) for k, v in t["footprint_minutes"].items()}
            ),
            essential_consumables=frozenset(t.get("essential_consumables", [])),
            optional_consumables=frozenset(t.get("optional_consumables", [])),
            priority=int(t["priority"]),
            facility_level=t["facility_level"],
            diagnostic_sensitivity=float(t["diagnostic_sensitivity"]),
            diagnostic_specificity=float(t.get("diagnostic_specificity", 1.0)),
            cure_probability=float(t["cure_probability"]),
            partial_effect=float(t.get("partial_effect", 1.0)),
        )
    return DiseaseDefinition(
        id=entry["id"], incidence=incidence, states=states, treatment=treatment
    )


def _build(doc: Mapping) -> ScenarioConfig:
    pop = doc["population"]
    districts = tuple(
        DistrictSpec(
            id=d["id"],
            share=float(d["share"]),
            urban_share=float(d["urban_share"]),
            remoteness=d["remoteness"],
        )
        for d in pop["districts"]
    )
    population = PopulationSpec(
        size=int(pop["size"]),
        age_bands=tuple(
            AgeBand(float(b["lower"]), float(b["upper"]), float(b["share"]))
            for b in pop["age_bands"]
        ),
        sex_ratio_female=float(pop["sex_ratio_female"]),
        districts=districts,
        wealth_shares=tuple(float(v) for v in pop["wealth_shares"]),
        education_shares=tuple(float(v) for v in pop["education_shares"]),
    )
    demo = doc["demography"]
    mort = demo["mortality"]
    demography = DemographyRates(
        crude_birth_hazard_per_day=float(demo["crude_birth_rate_per_1000_per_year"])
        / 1000.0
        / DAYS_PER_YEAR,
        mortality_band_lower_ages=tuple(float(a) for a in mort["band_lower_ages"]),
        mortality_female_per_day=tuple(float(r) / DAYS_PER_YEAR for r in mort["female_per_year"]),
        mortality_male_per_day=tuple(float(r) / DAYS_PER_YEAR for r in mort["male_per_year"]),
    )
    table = doc["life_table"]
    life_table = LifeTable(
        band_lower_ages=tuple(float(a) for a in table["band_lower_ages"]),
        female=tuple(float(e) for e in table["female_expectancy"]),
        male=tuple(float(e) for e in table["male_expectancy"]),
    )
    diseases = tuple(_build_disease(entry) for entry in doc.get("diseases", []))
    seeking_doc = doc["seeking"]
    odds = seeking_doc.get("odds_ratios", {})
    seeking = SeekingModel(
        base_probability={k: float(v) for k, v in seeking_doc["base_probability"].items()},
        wealth_odds={int(k): float(v) for k, v in odds.get("wealth_quintile", {}).items()},
        education_odds={k: float(v) for k, v in odds.get("education", {}).items()},
        residence_odds={k: float(v) for k, v in odds.get("residence", {}).items()},
        remoteness_odds={k: float(v) for k, v in odds.get("remoteness", {}).items()},
    )
    facilities = tuple(
        FacilityGroup(
            district=f["district"],
            level=f["level"],
            ownership=f["ownership"],
            staff_count={k: int(v) for k, v in f.get("staff_count", {}).items()},
            minutes_per_day={k: float(v) for k, v in f.get("minutes_per_day", {}).items()},
            shifters=CapacityShifters(
                absence_rate=float(f.get("absence_rate", 0.0)),
                ownership_multiplier=float(f.get("ownership_multiplier", 1.0)),
                facility_scale_multiplier=float(f.get("facility_scale_multiplier", 1.0)),
            ),
            consumable_availability={
                k: float(v) for k, v in f.get("consumable_availability", {}).items()
            },
            bed_count=int(f.get("bed_count", 0)),
            index=i,
        )
        for i, f in enumerate(doc.get("facilities", []))
    )
    district_index = {d.id: i for i, d in enumerate(districts)}
    facility_index = {
        (district_index[f.district], f.level): f.index for f in facilities
    }
    symptom_index = {sym: i for i, sym in enumerate(seeking.base_probability)}
    horizon = doc["horizon"]
    pop_fp_doc = {
        "population": doc["population"],
        "demography": doc["demography"],
        "life_table": doc["life_table"],
        "horizon": horizon,
    }
    return ScenarioConfig(
        name=doc.get("name", "scenario"),
        mode=int(doc["mode"]),
        start=dt.date.fromisoformat(horizon["start"]),
        end=dt.date.fromisoformat(horizon["end"]),
        patience_days=int(doc.get("patience_days", 14)),
        cadres=tuple(doc["cadres"]),
        items=tuple(doc.get("consumable_items", [])),
        population=population,
        demography=demography,
        life_table=life_table,
        diseases=diseases,
        seeking=seeking,
        facilities=facilities,
        symptom_index=symptom_index,
        facility_index=facility_index,
        remoteness_by_district=tuple(d.remoteness for d in districts),
        raw=doc,
        config_fingerprint=fingerprint(doc),
        population_fingerprint=fingerprint(pop_fp_doc),
    )


def load_scenario(source: Union[str, Path, Mapping]) -> ScenarioConfig:
    """Load and validate a scenario from a JSON file path or a dict."""
    if isinstance(source, Mapping):
        doc = source
    else:
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    errors = validate_raw(doc)
    if errors:
        raise ConfigError(errors)
    return _build(doc)
