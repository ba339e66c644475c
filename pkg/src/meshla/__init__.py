"""Seeded time-slotted simulator of multi-radio mesh networks whose nodes
pick channel-sets online with learning automata."""

__version__ = "0.1.0"

from .config import ScenarioConfig, load_config
from .engine import MetricsSeries, run
from .runner import run_scenario, run_many, sweep, baseline

__all__ = [
    "ScenarioConfig",
    "load_config",
    "MetricsSeries",
    "run",
    "run_scenario",
    "run_many",
    "sweep",
    "baseline",
    "__version__",
]
