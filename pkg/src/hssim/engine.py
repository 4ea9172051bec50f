"""Daily-tick orchestration of demography, disease, care and burden.

Fixed phase order within every simulated day:

  1. demography (births, background deaths)
  2. disease onsets
  3. disease progression and disease deaths
  4. care seeking, new appointment requests
  5. health-system processing under the scenario's constraint mode
  6. burden accrual

A person who dies in phase 1 or 3 takes no further part in that day;
their pending requests are cancelled lazily when the queue reaches them.
Every random draw is keyed by (seed, purpose, entity, date), so runs
with the same seed agree draw-for-draw across constraint modes.
"""

from __future__ import annotations

import datetime as dt
import itertools
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping, Optional

import numpy as np

from .burden import BACKGROUND_CAUSE_LABEL, DalyRecord, accrue_yld_day, yll_on_death
from .config import ScenarioConfig
from .disease import incidence_step, progression_day
from .health_seeking import generate_hsi_day
from .health_system import DayResult, HealthSystem
from .population import demography_step, initialize_population
from .rng import RngRegistry

logger = logging.getLogger(__name__)


class EngineError(RuntimeError):
    """An internal bookkeeping invariant failed during a run."""


@dataclass(frozen=True)
class SimClock:
    """Inclusive daily calendar for one run."""

    start: dt.date
    end: dt.date

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise ValueError("clock end precedes start")

    @property
    def n_days(self) -> int:
        return self.end.toordinal() - self.start.toordinal() + 1

    def days(self) -> Iterator[dt.date]:
        for ordinal in range(self.start.toordinal(), self.end.toordinal() + 1):
            yield dt.date.fromordinal(ordinal)


@dataclass(frozen=True)
class RunResult:
    """Everything a finished run reports; numeric content is enough to
    reproduce every output file byte for byte."""

    scenario_name: str
    mode: int
    master_seed: int
    config_fingerprint: str
    population_fingerprint: str
    horizon_start: dt.date
    horizon_end: dt.date
    daly_records: tuple[DalyRecord, ...]
    births: int
    deaths_by_cause: Mapping[str, int]
    onsets_by_disease: Mapping[str, int]
    delivered_total: int
    deferred_event_days: int
    expired_total: int
    cancelled_total: int
    treatment_outcomes: Mapping[str, Mapping[str, int]]
    facility_labels: tuple[tuple[str, str], ...]
    cadre_order: tuple[str, ...]
    daily_delivery: np.ndarray  # [day, facility, (delivered, deferred, expired)]
    utilization: Mapping[tuple[int, str], tuple[int, int, int]]  # tenths
    final_alive: int
    final_prevalence: Mapping[str, int]
    wall_seconds: float = field(compare=False, default=0.0)

    def total_yld(self) -> float:
        return sum(r.yld for r in self.daly_records)

    def total_yll(self) -> float:
        return sum(r.yll for r in self.daly_records)

    def total_dalys(self) -> float:
        return sum(r.daly for r in self.daly_records)

    def summary_dict(self) -> dict:
        """JSON-able summary; deliberately excludes wall-clock time so
        identical runs serialize identically."""
        return {
            "scenario": self.scenario_name,
            "mode": self.mode,
            "master_seed": self.master_seed,
            "config_fingerprint": self.config_fingerprint,
            "population_fingerprint": self.population_fingerprint,
            "horizon": {
                "start": self.horizon_start.isoformat(),
                "end": self.horizon_end.isoformat(),
            },
            "totals": {
                "dalys": self.total_dalys(),
                "yld": self.total_yld(),
                "yll": self.total_yll(),
                "delivered": self.delivered_total,
                "deferred_event_days": self.deferred_event_days,
                "expired": self.expired_total,
                "cancelled": self.cancelled_total,
                "births": self.births,
                "final_alive": self.final_alive,
            },
            "deaths_by_cause": dict(sorted(self.deaths_by_cause.items())),
            "onsets_by_disease": dict(sorted(self.onsets_by_disease.items())),
            "final_prevalence": dict(sorted(self.final_prevalence.items())),
            "treatment_outcomes": {
                disease: dict(sorted(outcomes.items()))
                for disease, outcomes in sorted(self.treatment_outcomes.items())
            },
            "dalys_by_year_cause": [
                {"year": r.year, "cause": r.cause, "yld": r.yld, "yll": r.yll}
                for r in self.daly_records
            ],
        }

    @classmethod
    def from_summary(cls, summary: Mapping) -> "RunResult":
        """Rebuild the comparison-relevant fields from a summary dict.

        Daily arrays and utilization are not round-tripped; the result
        supports burden comparison and totals, nothing more.
        """
        records = tuple(
            DalyRecord(year=e["year"], cause=e["cause"], yld=e["yld"], yll=e["yll"])
            for e in summary["dalys_by_year_cause"]
        )
        totals = summary["totals"]
        return cls(
            scenario_name=summary["scenario"],
            mode=summary["mode"],
            master_seed=summary["master_seed"],
            config_fingerprint=summary["config_fingerprint"],
            population_fingerprint=summary["population_fingerprint"],
            horizon_start=dt.date.fromisoformat(summary["horizon"]["start"]),
            horizon_end=dt.date.fromisoformat(summary["horizon"]["end"]),
            daly_records=records,
            births=totals["births"],
            deaths_by_cause=dict(summary["deaths_by_cause"]),
            onsets_by_disease=dict(summary["onsets_by_disease"]),
            delivered_total=totals["delivered"],
            deferred_event_days=totals["deferred_event_days"],
            expired_total=totals["expired"],
            cancelled_total=totals["cancelled"],
            treatment_outcomes={
                k: dict(v) for k, v in summary["treatment_outcomes"].items()
            },
            facility_labels=(),
            cadre_order=(),
            daily_delivery=np.zeros((0, 0, 3), dtype=np.int64),
            utilization={},
            final_alive=totals["final_alive"],
            final_prevalence=dict(summary["final_prevalence"]),
        )

    def daly_rows(self) -> Iterator[tuple]:
        yield ("year", "cause", "yld", "yll", "daly")
        for r in self.daly_records:
            yield (r.year, r.cause, r.yld, r.yll, r.daly)

    def delivery_rows(self) -> Iterator[tuple]:
        yield ("date", "district", "level", "delivered", "deferred", "expired")
        start = self.horizon_start.toordinal()
        for day in range(self.daily_delivery.shape[0]):
            date = dt.date.fromordinal(start + day).isoformat()
            for fac, (district, level) in enumerate(self.facility_labels):
                delivered, deferred, expired = self.daily_delivery[day, fac]
                yield (date, district, level, int(delivered), int(deferred), int(expired))

    def utilization_rows(self) -> Iterator[tuple]:
        yield (
            "district", "level", "cadre",
            "available_minutes", "consumed_minutes", "overdraw_minutes", "utilization",
        )
        for fac, (district, level) in enumerate(self.facility_labels):
            for cadre in self.cadre_order:
                if (fac, cadre) not in self.utilization:
                    continue
                available, consumed, overdraw = self.utilization[(fac, cadre)]
                ratio = "" if available == 0 else consumed / available
                yield (
                    district, level, cadre,
                    available / 10.0, consumed / 10.0, overdraw / 10.0, ratio,
                )


Observer = Callable[[dt.date, "object", DayResult], None]


def run(
    config: ScenarioConfig,
    seed: int,
    observer: Optional[Observer] = None,
) -> RunResult:
    """Simulate one scenario under one master seed.

    The observer, when given, is called after each completed day with
    (date, population, day_result); it must not mutate either.
    """
    t0 = time.perf_counter()
    rng = RngRegistry(seed)
    clock = SimClock(config.start, config.end)
    definitions = config.diseases
    defs_by_id = {d.id: d for d in definitions}

    pop = initialize_population(config.population, config.start, rng)
    for defn in definitions:
        pop.register_disease(defn.id)
    open_hsi: dict[str, np.ndarray] = {
        d.id: np.zeros(len(pop), dtype=bool) for d in definitions
    }
    system = HealthSystem(config.facilities)

    def facility_of(district_idx: int, level: str) -> int:
        return config.facility_index[(district_idx, level)]

    seq_counter = itertools.count().__next__
    n_days = clock.n_days
    n_fac = len(config.facilities)
    daily_delivery = np.zeros((n_days, n_fac, 3), dtype=np.int64)
    utilization: dict[tuple[int, str], list[int]] = {}
    daly_acc: dict[tuple[int, str], list[float]] = {}
    deaths_by_cause: dict[str, int] = {}
    onsets: dict[str, int] = {d.id: 0 for d in definitions}
    outcome_acc: dict[str, dict[str, int]] = {}
    births = 0
    delivered_total = deferred_event_days = expired_total = cancelled_total = 0

    def charge_yll(person: int, date: dt.date, cause: str) -> None:
        years = yll_on_death(pop, person, date, config.life_table)
        key = (date.year, cause)
        daly_acc.setdefault(key, [0.0, 0.0])[1] += years
        deaths_by_cause[cause] = deaths_by_cause.get(cause, 0) + 1

    for day_idx, date in enumerate(clock.days()):
        # 1. demography
        born, dead_background = demography_step(pop, config.demography, date, rng)
        births += len(born)
        for person in dead_background:
            charge_yll(person, date, BACKGROUND_CAUSE_LABEL)
        if born:
            for disease_id in open_hsi:
                open_hsi[disease_id] = np.append(
                    open_hsi[disease_id], np.zeros(len(born), dtype=bool)
                )

        # 2. onsets
        for defn in definitions:
            onsets[defn.id] += len(incidence_step(pop, defn, date, rng))

        # 3. progression and disease deaths
        for k, defn in enumerate(definitions):
            died, _recovered = progression_day(pop, defn, date, rng, cause_code=1 + k)
            for person in died:
                charge_yll(person, date, defn.id)

        # 4. care seeking
        for event in generate_hsi_day(
            pop,
            date,
            config.seeking,
            definitions,
            open_hsi,
            rng,
            symptom_index=config.symptom_index,
            remoteness_by_district=config.remoteness_by_district,
            facility_of=facility_of,
            patience_days=config.patience_days,
            next_seq=seq_counter,
        ):
            system.enqueue(event)

        # 5. health system
        ledgers = system.open_all(date)
        day_result = system.process_day(pop, defs_by_id, ledgers, config.mode, date, rng)
        for event in day_result.delivered:
            open_hsi[event.disease][event.person] = False
            daily_delivery[day_idx, event.facility, 0] += 1
        for event in day_result.deferred:
            daily_delivery[day_idx, event.facility, 1] += 1
        for event in day_result.expired:
            open_hsi[event.disease][event.person] = False
            daily_delivery[day_idx, event.facility, 2] += 1
        for event in day_result.cancelled:
            open_hsi[event.disease][event.person] = False
        delivered_total += len(day_result.delivered)
        deferred_event_days += len(day_result.deferred)
        expired_total += len(day_result.expired)
        cancelled_total += len(day_result.cancelled)
        for disease_id, outcomes in day_result.treatment_outcomes.items():
            acc = outcome_acc.setdefault(disease_id, {})
            for outcome, count in outcomes.items():
                acc[outcome.value] = acc.get(outcome.value, 0) + count
        for ledger in ledgers:
            if config.mode == 2:
                if not ledger.conserved() or any(r < 0 for r in ledger.remaining.values()):
                    raise EngineError(
                        f"capacity ledger violated at facility {ledger.facility} on {date}"
                    )
            for cadre, initial in ledger.initial.items():
                cell = utilization.setdefault((ledger.facility, cadre), [0, 0, 0])
                cell[0] += initial
                cell[1] += ledger.consumed.get(cadre, 0)
                cell[2] += max(0, -ledger.remaining.get(cadre, 0))

        # 6. burden
        if definitions:
            yld = accrue_yld_day(pop, definitions)
            for k, defn in enumerate(definitions):
                if yld[k] != 0.0:
                    key = (date.year, defn.id)
                    daly_acc.setdefault(key, [0.0, 0.0])[0] += yld[k]

        if observer is not None:
            observer(date, pop, day_result)
        if date.month == 1 and date.day == 1:
            logger.debug("%s: alive=%d pending=%d", date, pop.alive_count(), system.pending_count())

    records = tuple(
        DalyRecord(year=year, cause=cause, yld=acc[0], yll=acc[1])
        for (year, cause), acc in sorted(daly_acc.items())
    )
    final_prevalence = {
        d.id: int(((pop.conditions[d.id] >= 0) & pop.alive).sum()) for d in definitions
    }
    return RunResult(
        scenario_name=config.name,
        mode=config.mode,
        master_seed=seed,
        config_fingerprint=config.config_fingerprint,
        population_fingerprint=config.population_fingerprint,
        horizon_start=config.start,
        horizon_end=config.end,
        daly_records=records,
        births=births,
        deaths_by_cause=deaths_by_cause,
        onsets_by_disease=onsets,
        delivered_total=delivered_total,
        deferred_event_days=deferred_event_days,
        expired_total=expired_total,
        cancelled_total=cancelled_total,
        treatment_outcomes=outcome_acc,
        facility_labels=tuple((f.district, f.level) for f in config.facilities),
        cadre_order=config.cadres,
        daily_delivery=daily_delivery,
        utilization={k: tuple(v) for k, v in utilization.items()},
        final_alive=pop.alive_count(),
        final_prevalence=final_prevalence,
        wall_seconds=time.perf_counter() - t0,
    )
