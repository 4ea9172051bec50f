"""Supply side: facility groups, daily capacity ledgers and the
appointment queue.

Facilities are modelled as (district, level) groups, not individual
sites.  Worker time is tracked in integer tenths of a minute so the
conservation identity consumed + remaining = initial holds exactly in
every arithmetic sense; floats never enter the ledger.  Consumable
availability is drawn once per (facility, item, month) and cached, so
every request in the same month sees the same answer.

Queue discipline per facility: ascending (priority, earliest date,
sequence number).  A request that cannot be served today keeps its
original earliest date and is retried daily until its expiry passes.
"""

from __future__ import annotations

import datetime as dt
import heapq
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .disease import DiseaseDefinition, TreatmentOutcome, apply_treatment
from .population import Population
from .production import (
    AppointmentFootprint,
    CapacityShifters,
    ConsumableStatus,
    IDENTITY_SHIFTERS,
    effective_minutes,
    feasible,
)
from .rng import RngRegistry, stable_code

FACILITY_LEVELS = ("0", "1a", "1b", "2", "3")
OWNERSHIP_CATEGORIES = ("public", "private_nonprofit", "private_forprofit", "informal")

# Ledger entries stay far below this; trips only on absurd configs.
_TENTHS_LIMIT = 1 << 62


@dataclass(frozen=True)
class FacilityGroup:
    """Pooled capacity of all facilities of one level in one district."""

    district: str
    level: str
    ownership: str
    staff_count: Mapping[str, int]
    minutes_per_day: Mapping[str, float]
    shifters: CapacityShifters = IDENTITY_SHIFTERS
    consumable_availability: Mapping[str, float] = field(default_factory=dict)
    bed_count: int = 0
    index: int = 0

    def __post_init__(self) -> None:
        if self.level not in FACILITY_LEVELS:
            raise ValueError(f"unknown facility level {self.level!r}")
        if self.ownership not in OWNERSHIP_CATEGORIES:
            raise ValueError(f"unknown ownership {self.ownership!r}")
        for cadre, count in self.staff_count.items():
            if count < 0:
                raise ValueError(f"negative staff count for {cadre!r}")
        for item, p in self.consumable_availability.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"availability for {item!r} outside [0, 1]")
        if self.bed_count < 0:
            raise ValueError("negative bed count")


@dataclass(slots=True)
class HsiEvent:
    """One appointment request, mutable only in its attempt counter."""

    person: int
    disease: str
    footprint: AppointmentFootprint
    essential_consumables: tuple[str, ...]
    optional_consumables: tuple[str, ...]
    priority: int
    facility_level: str
    facility: int
    earliest_ordinal: int
    expiry_ordinal: int
    sequence_number: int
    attempts: int = 0
    footprint_tenths: dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.expiry_ordinal < self.earliest_ordinal:
            raise ValueError("expiry precedes earliest service date")
        if not self.footprint_tenths:
            self.footprint_tenths = {
                c: int(round(m * 10.0)) for c, m in self.footprint.minutes.items()
            }

    def sort_key(self) -> tuple[int, int, int]:
        return (self.priority, self.earliest_ordinal, self.sequence_number)


class DailyCapacityLedger:
    """Integer tenth-minute account for one facility and one day.

    `remaining` may go negative outside Mode 2 (overdraw is the excess of
    consumption over the initial endowment); Mode 2 never lets it drop
    below zero because feasibility is checked before every consume.
    """

    __slots__ = ("facility", "date_ordinal", "initial", "remaining", "consumed")

    def __init__(self, facility: int, date_ordinal: int, initial: Mapping[str, int]) -> None:
        self.facility = facility
        self.date_ordinal = date_ordinal
        self.initial = dict(initial)
        self.remaining = dict(initial)
        self.consumed = {cadre: 0 for cadre in initial}

    def consume(self, tenths: Mapping[str, int]) -> None:
        for cadre, amount in tenths.items():
            self.consumed[cadre] = self.consumed.get(cadre, 0) + amount
            self.remaining[cadre] = self.remaining.get(cadre, 0) - amount

    def overdraw(self) -> dict[str, int]:
        return {c: max(0, -r) for c, r in self.remaining.items()}

    def conserved(self) -> bool:
        cadres = set(self.initial) | set(self.consumed)
        return all(
            self.consumed.get(c, 0) + self.remaining.get(c, 0) == self.initial.get(c, 0)
            for c in cadres
        )


def open_day(facility: FacilityGroup, date: dt.date) -> DailyCapacityLedger:
    """Fresh ledger with the facility's effective minutes, in tenths.

    The endowment is identical across Modes; Modes differ only in
    whether the ledger constrains delivery.
    """
    initial: dict[str, int] = {}
    for cadre, count in facility.staff_count.items():
        minutes = effective_minutes(
            count, facility.minutes_per_day.get(cadre, 0.0), facility.shifters
        )
        tenths = int(round(minutes * 10.0))
        if tenths >= _TENTHS_LIMIT:
            raise OverflowError(f"capacity for {cadre!r} exceeds ledger range")
        initial[cadre] = tenths
    return DailyCapacityLedger(facility.index, date.toordinal(), initial)


def month_ordinal(date: dt.date) -> int:
    """Ordinal of the first day of `date`'s month, the cache key epoch."""
    return date.replace(day=1).toordinal()


def draw_consumable(
    facility: FacilityGroup,
    item: str,
    date: dt.date,
    rng: RngRegistry,
    cache: Optional[dict] = None,
) -> bool:
    """Whether `item` is in stock at `facility` during `date`'s month.

    One Bernoulli draw per (facility, item, month), keyed so the answer
    does not depend on who asks first or how often.
    """
    month = month_ordinal(date)
    key = (facility.index, item, month)
    if cache is not None and key in cache:
        return cache[key]
    p = facility.consumable_availability[item]
    u = rng.stream("consumables").uniform(facility.index, month, index=stable_code(item))
    result = u < p
    if cache is not None:
        cache[key] = result
    return result


def consumable_status(
    facility: FacilityGroup,
    essential: Iterable[str],
    optional: Iterable[str],
    date: dt.date,
    rng: RngRegistry,
    cache: Optional[dict] = None,
) -> ConsumableStatus:
    """Classify this month's stock position for one appointment type."""
    for item in essential:
        if not draw_consumable(facility, item, date, rng, cache):
            return ConsumableStatus.MISSING_ESSENTIAL
    for item in optional:
        if not draw_consumable(facility, item, date, rng, cache):
            return ConsumableStatus.PARTIAL
    return ConsumableStatus.FULL


@dataclass
class DayResult:
    """Outcome of one processing pass over every facility queue."""

    delivered: list[HsiEvent] = field(default_factory=list)
    deferred: list[HsiEvent] = field(default_factory=list)
    expired: list[HsiEvent] = field(default_factory=list)
    cancelled: list[HsiEvent] = field(default_factory=list)
    treatment_outcomes: dict[str, dict[TreatmentOutcome, int]] = field(default_factory=dict)
    infeasible_reasons: dict[str, int] = field(default_factory=dict)

    @property
    def due(self) -> int:
        return len(self.delivered) + len(self.deferred) + len(self.expired)


class HealthSystem:
    """Facility roster plus per-facility priority queues and the
    month-scoped consumable cache."""

    def __init__(self, facilities: Sequence[FacilityGroup]) -> None:
        seen: set[tuple[str, str]] = set()
        for fac in facilities:
            key = (fac.district, fac.level)
            if key in seen:
                raise ValueError(f"duplicate facility group {key}")
            seen.add(key)
        self.facilities = tuple(facilities)
        self.queues: list[list[tuple[tuple[int, int, int], HsiEvent]]] = [
            [] for _ in facilities
        ]
        self.consumable_cache: dict = {}

    def enqueue(self, event: HsiEvent) -> None:
        heapq.heappush(self.queues[event.facility], (event.sort_key(), event))

    def pending_count(self) -> int:
        return sum(len(q) for q in self.queues)

    def open_all(self, date: dt.date) -> list[DailyCapacityLedger]:
        return [open_day(fac, date) for fac in self.facilities]

    def process_day(
        self,
        pop: Population,
        definitions: Mapping[str, DiseaseDefinition],
        ledgers: Sequence[DailyCapacityLedger],
        mode: int,
        date: dt.date,
        rng: RngRegistry,
    ) -> DayResult:
        """Serve every due request at every facility under `mode`.

        Requests whose person has died or cleared the condition are
        cancelled without consuming anything.  Infeasible requests are
        deferred with their original earliest date, or expired once
        their patience window has passed.
        """
        if mode not in (0, 1, 2):
            raise ValueError(f"mode must be 0, 1 or 2, got {mode!r}")
        today = date.toordinal()
        result = DayResult()
        for fac_idx, facility in enumerate(self.facilities):
            queue = self.queues[fac_idx]
            ledger = ledgers[fac_idx]
            retry: list[HsiEvent] = []
            while queue and queue[0][1].earliest_ordinal <= today:
                _, event = heapq.heappop(queue)
                state = pop.conditions[event.disease][event.person]
                if not pop.alive[event.person] or state < 0:
                    result.cancelled.append(event)
                    continue
                status = consumable_status(
                    facility,
                    event.essential_consumables,
                    event.optional_consumables,
                    date,
                    rng,
                    self.consumable_cache,
                )
                check = feasible(
                    event.footprint_tenths,
                    ledger.remaining,
                    facility.staff_count,
                    status,
                    mode,
                )
                if not check.delivered:
                    event.attempts += 1
                    if today >= event.expiry_ordinal:
                        result.expired.append(event)
                    else:
                        retry.append(event)
                    reason = check.reason or "unknown"
                    result.infeasible_reasons[reason] = (
                        result.infeasible_reasons.get(reason, 0) + 1
                    )
                    continue
                ledger.consume(event.footprint_tenths)
                outcome = apply_treatment(
                    pop, event.person, definitions[event.disease], status, date, rng
                )
                per_disease = result.treatment_outcomes.setdefault(event.disease, {})
                per_disease[outcome] = per_disease.get(outcome, 0) + 1
                result.delivered.append(event)
            for event in retry:
                heapq.heappush(queue, (event.sort_key(), event))
            result.deferred.extend(retry)
        return result
