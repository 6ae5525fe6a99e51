"""Budget arithmetic and the three-phase bet-and-run orchestrator.

Phase 1 runs ``k`` independent runs for their share ``b_i`` of the
initialization budget ``t1`` and pauses them.  Phase 2 hands the paused traces
to a decision maker and charges its running time ``tau``.  Phase 3 splits the
remaining ``t2 = T - t1 - tau`` evenly among the ``m`` chosen runs.
"""

from __future__ import annotations

import functools
import math
import re
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Protocol, Sequence, Union

from betrun.deciders import DecisionContext, DecisionOutcome, resolve_decider
from betrun.errors import ConfigError, DecisionError
from betrun.trace import ImprovementTrace, TraceView

STRATEGIES = ("even", "luby")
TAU_MODES = ("measured", "zero")


@functools.lru_cache(maxsize=None)
def luby(i: int) -> int:
    """The ``i``-th term (1-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    if i < 1:
        raise ValueError("luby index starts at 1")
    z = (i + 1).bit_length() - 1  # largest z with 2**z <= i + 1
    if (1 << z) == i + 1:
        return 1 << (z - 1)
    return luby(i - (1 << z) + 1)


def luby_sum(k: int) -> int:
    return sum(luby(i) for i in range(1, k + 1))


@dataclass(frozen=True)
class BudgetPlan:
    total_budget: int
    init_budget: int
    num_initial_runs: int
    num_continued_runs: int = 1
    strategy: str = "even"

    def __post_init__(self):
        T, t1, k, m = self.total_budget, self.init_budget, self.num_initial_runs, self.num_continued_runs
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown budgeting strategy {self.strategy!r}")
        if k < 1:
            raise ConfigError("need at least one initial run")
        if not 1 <= m <= k:
            raise ConfigError(f"continued runs m={m} must lie in 1..k={k}")
        if not 0 <= t1 <= T:
            raise ConfigError(f"initialization budget t1={t1} must lie in 0..T={T}")
        unit = k if self.strategy == "even" else luby_sum(k)
        if t1 % unit:
            raise ConfigError(f"t1={t1} is not a multiple of {unit} as required by strategy {self.strategy!r} with k={k}")

    @property
    def continuation_per_run(self) -> int:
        """Continuation budget per chosen run assuming a free decision."""
        return (self.total_budget - self.init_budget) // self.num_continued_runs


def allocate(plan: BudgetPlan) -> tuple[int, ...]:
    """Per-run initialization budgets ``b_i``; they sum exactly to ``t1``."""
    k, t1 = plan.num_initial_runs, plan.init_budget
    if plan.strategy == "even":
        if t1 % k:
            raise ConfigError(f"t1={t1} not divisible by k={k}")
        return (t1 // k,) * k
    total = luby_sum(k)
    if t1 % total:
        raise ConfigError(f"t1={t1} not divisible by the Luby sum {total}")
    unit = t1 // total
    return tuple(unit * luby(i) for i in range(1, k + 1))


_PRESET_RE = re.compile(r"^(restarts|luby_restarts|luby-restarts)(?:\((\d+)\)|[:=](\d+))$")


def preset(name: str, total_budget: int) -> tuple[BudgetPlan, str]:
    """Named configurations: ``single``, ``restarts(k)``, ``luby_restarts(k)``, ``f17``.

    Restart presets use the largest admissible ``t1 <= T``; any remainder goes
    to continuing the current best run.
    """
    T = int(total_budget)
    name = name.strip()
    if name == "single":
        return BudgetPlan(T, 0, 1, 1, "even"), "current-best"
    if name == "f17":
        t1 = (4 * T // 10) // 40 * 40
        return BudgetPlan(T, t1, 40, 1, "even"), "current-best"
    m = _PRESET_RE.match(name)
    if m is None:
        raise ConfigError(f"unknown preset {name!r}")
    k = int(m.group(2) or m.group(3))
    if k < 1:
        raise ConfigError("restart presets need k >= 1")
    if m.group(1) == "restarts":
        return BudgetPlan(T, T // k * k, k, 1, "even"), "current-best"
    unit = luby_sum(k)
    if T < unit:
        raise ConfigError(f"T={T} is smaller than the Luby sum {unit} for k={k}")
    return BudgetPlan(T, T // unit * unit, k, 1, "luby"), "current-best"


# -- resumable runs -------------------------------------------------------------


class RunSource(Protocol):
    """Something that can be advanced by a number of milliseconds and inspected."""

    run_id: str

    def advance(self, ms: int) -> None: ...

    def view(self) -> TraceView: ...

    @property
    def exhausted(self) -> bool: ...


class ReplayRun:
    """Replays a recorded trace under a virtual clock."""

    def __init__(self, trace: ImprovementTrace):
        self.trace = trace
        self.run_id = trace.run_id
        self.consumed = 0

    def advance(self, ms: int) -> None:
        self.consumed += ms

    def view(self) -> TraceView:
        return TraceView(self.trace, self.consumed)

    @property
    def exhausted(self) -> bool:
        # true once the virtual clock moves past the end of the recording
        end = self.trace.end_time
        return end is not None and self.consumed > end


class RunHandle:
    """Pausable wrapper enforcing the running/paused/terminated life cycle."""

    def __init__(self, source: RunSource):
        self.source = source
        self.run_id = source.run_id
        self.consumed = 0
        self.state = "paused"

    def run(self, ms: int) -> None:
        if self.state == "terminated":
            raise RuntimeError(f"run {self.run_id} already terminated")
        if ms < 0:
            raise ValueError("cannot run for a negative time")
        self.state = "running"
        self.source.advance(ms)
        self.consumed += ms
        self.state = "paused"

    def terminate(self) -> None:
        self.state = "terminated"

    def view(self) -> TraceView:
        view = self.source.view()
        return TraceView(view.trace, min(view.horizon, self.consumed))

    @property
    def trace_so_far(self) -> ImprovementTrace:
        view = self.view()
        tr = view.trace
        n = view.count
        return ImprovementTrace(tr.times[:n], tr.qualities[:n], run_id=tr.run_id, source=tr.source)


@dataclass(frozen=True)
class BetAndRunResult:
    final_quality: Optional[float]
    winner_run_id: Optional[str]
    winner_index: Optional[int]
    phase_budgets: tuple[int, int, int]
    per_run_final_qualities: tuple[Optional[float], ...]
    outcome: DecisionOutcome
    continuation_clamped: bool = False
    carried_forward: tuple[int, ...] = ()
    extensions: tuple[int, ...] = field(default=())

    @property
    def tau(self) -> int:
        return self.phase_budgets[1]


Decider = Callable[[DecisionContext, int], DecisionOutcome]


def _better(a: Optional[float], b: Optional[float]) -> bool:
    if a is None:
        return False
    return b is None or a < b


def run_bet_and_run(
    plan: BudgetPlan,
    runs: Sequence[RunSource],
    decider: Union[str, Decider],
    *,
    tau_mode: str = "measured",
    seed: int = 0,
    timer: Callable[[], int] = time.perf_counter_ns,
) -> BetAndRunResult:
    """Execute one bet-and-run over ``k`` resumable runs.

    With replay sources and ``tau_mode="zero"`` the result is a deterministic
    function of (plan, traces, decider, seed).  In ``measured`` mode the
    decider's wall time, rounded up to whole milliseconds, is charged as tau.
    """
    if tau_mode not in TAU_MODES:
        raise ConfigError(f"unknown tau mode {tau_mode!r}")
    k, m = plan.num_initial_runs, plan.num_continued_runs
    if len(runs) != k:
        raise ConfigError(f"plan expects {k} runs, got {len(runs)}")
    decide = resolve_decider(decider) if isinstance(decider, str) else decider

    budgets = allocate(plan)
    handles = [RunHandle(src) for src in runs]
    for h, b in zip(handles, budgets):
        h.run(b)

    ctx = DecisionContext(
        views=tuple(h.view() for h in handles),
        budgets=budgets,
        horizon_per_run=plan.continuation_per_run,
        rng_seed=seed,
    )
    start = timer()
    outcome = decide(ctx, m)
    elapsed_ns = timer() - start
    chosen = tuple(outcome.chosen)
    if len(chosen) != m or len(set(chosen)) != m or not all(0 <= c < k for c in chosen):
        raise DecisionError(f"decider returned {chosen!r}; expected {m} distinct indices in 0..{k - 1}")
    tau = math.ceil(elapsed_ns / 1_000_000) if tau_mode == "measured" else 0
    outcome = replace(outcome, decision_time=tau)

    t2 = plan.total_budget - plan.init_budget - tau
    clamped = t2 < 0
    t2 = max(t2, 0)
    share, extra = divmod(t2, m)
    favored = _favored(chosen, outcome.predictions, ctx)
    extensions = []
    for idx in chosen:
        ext = share + (extra if idx == favored else 0)
        handles[idx].run(ext)
        extensions.append(ext)
    chosen_set = set(chosen)
    for j, h in enumerate(handles):
        if j not in chosen_set:
            h.terminate()

    finals = tuple(h.view().last_quality for h in handles)
    best = None
    for idx in sorted(chosen):
        if best is None or _better(finals[idx], finals[best]):
            best = idx
    carried = tuple(idx for idx in sorted(chosen) if handles[idx].source.exhausted)
    return BetAndRunResult(
        final_quality=finals[best],
        winner_run_id=handles[best].run_id,
        winner_index=best,
        phase_budgets=(plan.init_budget, tau, t2),
        per_run_final_qualities=finals,
        outcome=outcome,
        continuation_clamped=clamped,
        carried_forward=carried,
        extensions=tuple(extensions),
    )


def _favored(chosen, predictions, ctx: DecisionContext) -> int:
    """Chosen run that receives the ``t2 mod m`` leftover milliseconds."""

    def key(idx):
        q = None
        if predictions is not None:
            q = predictions[idx]
        if q is None:
            q = ctx.views[idx].last_quality
        return (q is None, q if q is not None else 0.0, idx)

    return min(chosen, key=key)
