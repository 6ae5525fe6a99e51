"""Heuristic decision makers.

A decider maps the paused runs' truncated traces to the ``m`` runs that
should be continued.  Runs are indexed ``0..k-1``; every tie resolves to the
lowest index.  Deciders only look at recorded ``(time, quality)`` points and
never evaluate the objective themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from betrun.errors import ConfigError
from betrun.rng import make_rng
from betrun.trace import TraceView


@dataclass(frozen=True)
class DecisionContext:
    views: tuple[TraceView, ...]
    budgets: tuple[int, ...]
    horizon_per_run: int
    rng_seed: int = 0

    @property
    def k(self) -> int:
        return len(self.views)


@dataclass(frozen=True)
class DecisionOutcome:
    chosen: tuple[int, ...]
    decision_time: int = 0
    predictions: Optional[tuple[Optional[float], ...]] = None


def rank_ascending(keys: Sequence, m: int) -> tuple[int, ...]:
    return tuple(sorted(range(len(keys)), key=lambda i: (keys[i], i))[:m])


def _quality_key(q: Optional[float]):
    # empty traces rank after every measured quality
    return (1, 0.0) if q is None else (0, q)


def select_by_prediction(predictions: Sequence[Optional[float]], m: int) -> DecisionOutcome:
    chosen = rank_ascending([_quality_key(q) for q in predictions], m)
    return DecisionOutcome(chosen, predictions=tuple(predictions))


def current_best(ctx: DecisionContext, m: int) -> DecisionOutcome:
    return select_by_prediction([v.last_quality for v in ctx.views], m)


def current_worst(ctx: DecisionContext, m: int) -> DecisionOutcome:
    keys = [(0, 0.0) if v.last_quality is None else (1, -v.last_quality) for v in ctx.views]
    return DecisionOutcome(rank_ascending(keys, m))


def random_choice(ctx: DecisionContext, m: int) -> DecisionOutcome:
    rng = make_rng(ctx.rng_seed, 0x52414E44)
    chosen = rng.choice(ctx.k, size=m, replace=False)
    return DecisionOutcome(tuple(int(c) for c in chosen))


def most_improvements(ctx: DecisionContext, m: int) -> DecisionOutcome:
    """Most measure points per unit of ``ln(1 + b_i)``."""
    scores = []
    for view, b in zip(ctx.views, ctx.budgets):
        denom = math.log1p(b)
        scores.append(view.count / denom if denom > 0 else 0.0)
    return DecisionOutcome(rank_ascending([-s for s in scores], m))


def log_time_sum(ctx: DecisionContext, m: int) -> DecisionOutcome:
    scores = []
    for view in ctx.views:
        times = view.times
        scores.append(math.fsum(math.log(t) for t in times) if times else -math.inf)
    return DecisionOutcome(rank_ascending([-s for s in scores], m))


# -- diminishing returns -------------------------------------------------------

QUALITY_RATIO_CAP = 0.95
TIME_RATIO_FLOOR = 1.05


def _ceil(x: float) -> int:
    # tolerate representation error such as 2.0000000000000004
    return math.ceil(x - 1e-9)


@dataclass(frozen=True)
class DiminishingReturnsState:
    dq1: float
    dq2: float
    dt1: int
    dt2: int

    @property
    def dq(self) -> float:
        return min(QUALITY_RATIO_CAP, self.dq1 / self.dq2)

    @property
    def dt(self) -> float:
        return max(TIME_RATIO_FLOOR, self.dt1 / self.dt2)

    @classmethod
    def from_view(cls, view: TraceView) -> Optional["DiminishingReturnsState"]:
        times, qs = view.times, view.qualities
        if len(times) < 3:
            return None
        return cls(qs[-2] - qs[-1], qs[-3] - qs[-2], times[-1] - times[-2], times[-2] - times[-3])


def diminishing_returns_prediction(view: TraceView, end_time: int) -> Optional[float]:
    """Forecast the quality at ``end_time`` assuming shrinking, slowing gains.

    Each further improvement is ``ceil(previous * dq)`` quality units and
    arrives ``ceil(previous_gap * dt)`` ms after the one before.
    """
    last = view.last_quality
    state = DiminishingReturnsState.from_view(view)
    if state is None:
        return last
    dq, dt = state.dq, state.dt
    improvement, gap, now = state.dq1, state.dt1, view.last_time
    gained = 0
    while True:
        improvement = _ceil(improvement * dq)
        gap = _ceil(gap * dt)
        now += gap
        if now > end_time or improvement < 1:
            break
        gained += improvement
    return last - gained


def diminishing_returns(ctx: DecisionContext, m: int) -> DecisionOutcome:
    preds = [
        diminishing_returns_prediction(view, b + ctx.horizon_per_run) for view, b in zip(ctx.views, ctx.budgets)
    ]
    return select_by_prediction(preds, m)


BASIC_DECIDERS: dict[str, Callable[[DecisionContext, int], DecisionOutcome]] = {
    "current-best": current_best,
    "current-worst": current_worst,
    "random": random_choice,
    "most-improvements": most_improvements,
    "log-time-sum": log_time_sum,
    "diminishing-returns": diminishing_returns,
}


def resolve_decider(identifier: str) -> Callable[[DecisionContext, int], DecisionOutcome]:
    """Look up a decider by its CLI identifier, including model-based grammar."""
    name = identifier.strip()
    if name in BASIC_DECIDERS:
        return BASIC_DECIDERS[name]
    from betrun.models.predictors import model_decider

    try:
        return model_decider(name)
    except ConfigError:
        raise ConfigError(f"unknown decider {identifier!r}") from None


def is_known_decider(identifier: str) -> bool:
    try:
        resolve_decider(identifier)
    except ConfigError:
        return False
    return True


def decider_names() -> list[str]:
    return list(BASIC_DECIDERS)

