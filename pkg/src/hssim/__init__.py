"""Individual-based simulation of disease burden under health-system
capacity constraints.

The package simulates a synthetic population day by day: people acquire
and progress through diseases, seek care when symptomatic, and receive
it subject to the scenario's constraint mode (0: always delivered, 1:
requires the cadre to exist, 2: requires enough worker minutes).  Burden
is reported as disability-adjusted life years, and paired same-seed runs
quantify the burden averted by relaxing a constraint.
"""

from .burden import AvertedReport, DalyRecord, dalys_averted
from .config import ConfigError, ScenarioConfig, load_scenario, validate_raw
from .engine import RunResult, SimClock, run
from .rng import RngRegistry

__version__ = "0.1.0"

__all__ = [
    "AvertedReport",
    "ConfigError",
    "DalyRecord",
    "RngRegistry",
    "RunResult",
    "ScenarioConfig",
    "SimClock",
    "dalys_averted",
    "load_scenario",
    "run",
    "validate_raw",
    "__version__",
]
