"""Bet-and-run restart strategies with pluggable decision makers.

The engine splits a total time budget into an initialization phase shared by
``k`` independent runs, a decision phase in which a decision maker inspects the
runs' improvement traces, and a continuation phase for the ``m`` chosen runs.
"""

from betrun.errors import ConfigError, FitError, TraceError, TraceParseError, TraceValidationError
from betrun.trace import ImprovementTrace, TraceDataset, TraceView, final_quality, quality_at
from betrun.budget import BudgetPlan, allocate, luby, preset, run_bet_and_run

__all__ = [
    "BudgetPlan",
    "ConfigError",
    "FitError",
    "ImprovementTrace",
    "TraceDataset",
    "TraceError",
    "TraceParseError",
    "TraceValidationError",
    "TraceView",
    "allocate",
    "final_quality",
    "luby",
    "preset",
    "quality_at",
    "run_bet_and_run",
]

__version__ = "0.1.0"
