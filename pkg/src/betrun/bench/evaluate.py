"""Sampling campaigns over replayed trace datasets.

All strategies compared in one evaluation see the same sampled run sets
(paired design): for every instance a matrix of ``samples x k_max`` trace
indices is drawn once, and a setup with ``k`` initial runs uses the first
``k`` columns.  Column 0 doubles as the single-run baseline.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from betrun.bench.stats import VERDICTS, WilcoxonVerdict, wilcoxon_rank_sum
from betrun.budget import BudgetPlan, ReplayRun, luby_sum, preset, run_bet_and_run
from betrun.deciders import resolve_decider
from betrun.errors import ConfigError
from betrun.rng import derive_seed, make_rng
from betrun.trace import ImprovementTrace, TraceDataset, TraceView, quality_at

_VECTOR_SAMPLING_LIMIT = 20_000_000


@dataclass(frozen=True)
class Setup:
    """One bet-and-run configuration, independent of the total budget unless fixed."""

    label: str
    decider: str
    num_initial_runs: int
    num_continued_runs: int = 1
    init_budget: Optional[int] = None  # absolute t1 in ms
    init_fraction: Optional[float] = None  # t1 as a fraction of T, rounded down to an admissible value
    strategy: str = "even"
    preset_name: Optional[str] = None

    def plan(self, total_budget: int) -> BudgetPlan:
        if self.preset_name is not None:
            return preset(self.preset_name, total_budget)[0]
        k = self.num_initial_runs
        unit = k if self.strategy == "even" else luby_sum(k)
        if self.init_budget is not None:
            t1 = self.init_budget
        elif self.init_fraction is not None:
            t1 = int(math.floor(self.init_fraction * total_budget + 1e-9)) // unit * unit
        else:
            raise ConfigError(f"setup {self.label!r} has no initialization budget")
        return BudgetPlan(total_budget, t1, k, self.num_continued_runs, self.strategy)


def preset_setup(name: str, label: Optional[str] = None) -> Setup:
    plan, decider = preset(name, 100_000)
    return Setup(label or name, decider, plan.num_initial_runs, plan.num_continued_runs, strategy=plan.strategy, preset_name=name)


def f17_setup(k: int = 40, decider: str = "current-best", label: Optional[str] = None) -> Setup:
    """k runs with 1% of T each (t1 = k% of T), continue the current best."""
    return Setup(label or ("f17" if k == 40 and decider == "current-best" else f"{decider}/f17-k{k}"), decider, k, 1, init_fraction=k / 100)


@dataclass(frozen=True)
class SampleResult:
    final_quality: Optional[float]
    tau: int
    winner: Optional[str]


# -- sampling ------------------------------------------------------------------


def draw_samples(n_traces: int, k: int, samples: int, seed: int) -> np.ndarray:
    """``samples`` rows of ``k`` distinct trace indices, uniformly ordered."""
    if k > n_traces:
        raise ConfigError(f"cannot draw {k} distinct runs from a dataset of {n_traces}")
    rng = make_rng(seed, 0x53414D50)
    out = np.empty((samples, k), dtype=np.int64)
    if samples * n_traces <= _VECTOR_SAMPLING_LIMIT:
        chunk = max(1, 2_000_000 // n_traces)
        for start in range(0, samples, chunk):
            stop = min(samples, start + chunk)
            keys = rng.random((stop - start, n_traces))
            part = np.argpartition(keys, k - 1, axis=1)[:, :k] if k < n_traces else np.tile(np.arange(n_traces), (stop - start, 1))
            order = np.argsort(np.take_along_axis(keys, part, axis=1), axis=1, kind="stable")
            out[start:stop] = np.take_along_axis(part, order, axis=1)
    else:
        for row in range(samples):
            out[row] = rng.choice(n_traces, size=k, replace=False)
    return out


def sample_checksum(dataset: TraceDataset, rows: np.ndarray) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(rows, dtype="<i8").tobytes())
    for tr in dataset.traces:
        h.update(tr.run_id.encode())
        h.update(b"\0")
    return h.hexdigest()[:16]


# -- simulation ----------------------------------------------------------------


def _simulate_rows(args) -> list[SampleResult]:
    traces, setup, total_budget, rows, seeds, tau_mode = args
    plan = setup.plan(total_budget)
    decide = resolve_decider(setup.decider)
    k = plan.num_initial_runs
    out = []
    for row, seed in zip(rows, seeds):
        sources = [ReplayRun(traces[j]) for j in row[:k]]
        res = run_bet_and_run(plan, sources, decide, tau_mode=tau_mode, seed=seed)
        out.append(SampleResult(res.final_quality, res.tau, res.winner_run_id))
    return out


def default_jobs() -> int:
    return os.cpu_count() or 1


def simulate(
    traces: Sequence[ImprovementTrace],
    setup: Setup,
    total_budget: int,
    rows: np.ndarray,
    seeds: Sequence[int],
    tau_mode: str = "zero",
    jobs: int = 1,
    executor: Optional[ProcessPoolExecutor] = None,
) -> list[SampleResult]:
    """Run ``setup`` on every sampled row; results come back in row order."""
    rows = [tuple(int(j) for j in r) for r in rows]
    seeds = list(seeds)
    if jobs <= 1 or len(rows) < 2:
        return _simulate_rows((traces, setup, total_budget, rows, seeds, tau_mode))
    n_chunks = min(len(rows), jobs * 4)
    bounds = np.linspace(0, len(rows), n_chunks + 1).astype(int)
    tasks = [
        (traces, setup, total_budget, rows[lo:hi], seeds[lo:hi], tau_mode)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    if executor is not None:
        parts = list(executor.map(_simulate_rows, tasks))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_simulate_rows, tasks))
    return [r for part in parts for r in part]


def sample_seeds(seed: int, instance_index: int, samples: int) -> list[int]:
    return [derive_seed(seed, instance_index, s) for s in range(samples)]


def single_run_baseline(traces: Sequence[ImprovementTrace], rows: np.ndarray, total_budget: int) -> list[Optional[float]]:
    """Quality of each sample's first run given the whole budget."""
    return [quality_at(TraceView(traces[int(r[0])], total_budget), total_budget) for r in rows]


# -- scoring -------------------------------------------------------------------


def _key(q: Optional[float]) -> float:
    return math.inf if q is None else q


def score(setup_quality: Optional[float], baseline_quality: Optional[float]) -> int:
    """-1 when the setup beats the baseline, +1 when it loses, 0 on a tie."""
    a, b = _key(setup_quality), _key(baseline_quality)
    return -1 if a < b else (1 if a > b else 0)


@dataclass(frozen=True)
class ScoreRow:
    instance: str
    setup: str
    total_budget: int
    samples: int
    wins: int
    losses: int
    ties: int
    sample_checksum: str = ""

    @property
    def mean_score(self) -> float:
        return (self.losses - self.wins) / self.samples if self.samples else 0.0


def score_row(instance, setup_label, total_budget, finals, baseline, checksum="") -> ScoreRow:
    s = [score(f, b) for f, b in zip(finals, baseline)]
    return ScoreRow(instance, setup_label, total_budget, len(s), s.count(-1), s.count(1), s.count(0), checksum)


@dataclass
class ScoreReport:
    rows: list[ScoreRow] = field(default_factory=list)

    def per_setup_mean(self) -> dict[tuple[str, int], float]:
        """Mean over instances of the per-instance mean score."""
        acc: dict[tuple[str, int], list[float]] = {}
        for r in self.rows:
            acc.setdefault((r.setup, r.total_budget), []).append(r.mean_score)
        return {key: sum(v) / len(v) for key, v in acc.items()}


def score_against_single_run(
    datasets: TraceDataset | Iterable[TraceDataset],
    setups: Sequence[Setup],
    total_budget: int,
    samples: int,
    seed: int,
    tau_mode: str = "zero",
    jobs: int = 1,
) -> ScoreReport:
    """Score every setup against the first run of each sample given all of T."""
    if isinstance(datasets, TraceDataset):
        datasets = [datasets]
    report = ScoreReport()
    for j, ds in enumerate(datasets):
        k_max = max(s.plan(total_budget).num_initial_runs for s in setups)
        rows = draw_samples(len(ds.traces), k_max, samples, derive_seed(seed, j))
        seeds = sample_seeds(seed, j, samples)
        checksum = sample_checksum(ds, rows)
        baseline = single_run_baseline(ds.traces, rows, total_budget)
        for setup in setups:
            finals = [r.final_quality for r in simulate(ds.traces, setup, total_budget, rows, seeds, tau_mode, jobs)]
            report.rows.append(score_row(ds.instance_name, setup.label, total_budget, finals, baseline, checksum))
    return report


# -- beatability ---------------------------------------------------------------


@dataclass(frozen=True)
class BeatabilityReport:
    """Per-instance probability that the early-best run is beaten later on.

    The late horizon ``T - t1 + t1/k`` grants every sampled run the whole
    continuation budget, so this is an upper bound on what any decider can
    gain over current-best rather than the outcome of a runnable strategy.
    """

    probabilities: dict[str, float]
    samples: int

    @property
    def instances_beatable(self) -> int:
        return sum(1 for p in self.probabilities.values() if p > 0)

    @property
    def mean_probability(self) -> float:
        vals = list(self.probabilities.values())
        return sum(vals) / len(vals) if vals else 0.0


def _qualities_at(traces: Sequence[ImprovementTrace], t: int) -> np.ndarray:
    return np.array([_key(quality_at(TraceView(tr, t), t)) for tr in traces], dtype=float)


def beatable_fraction(dataset: TraceDataset, total_budget: int, init_budget: int, k: int, samples: int, seed: int) -> float:
    per_run = init_budget // k
    early = _qualities_at(dataset.traces, per_run)
    late = _qualities_at(dataset.traces, total_budget - init_budget + per_run)
    rows = draw_samples(len(dataset.traces), k, samples, seed)
    e, l = early[rows], late[rows].copy()
    pick = np.argmin(e, axis=1)  # first minimum = lowest index in the sample
    idx = np.arange(len(rows))
    picked_late = l[idx, pick]
    l[idx, pick] = np.inf
    beaten = l.min(axis=1) < picked_late
    return float(beaten.mean())


def estimate_beatability(
    datasets: TraceDataset | Iterable[TraceDataset],
    total_budget: int,
    init_budget: int,
    k: int,
    samples: int,
    seed: int,
) -> BeatabilityReport:
    if isinstance(datasets, TraceDataset):
        datasets = [datasets]
    probs = {}
    for j, ds in enumerate(datasets):
        probs[ds.instance_name] = beatable_fraction(ds, total_budget, init_budget, k, samples, derive_seed(seed, j))
    return BeatabilityReport(probs, samples)


def smallest_informative_init_budget(dataset: TraceDataset, k: int, strategy: str, probe_samples: int, seed: int) -> int:
    """Smallest admissible t1 giving every run of every probed sample a data point."""
    rows = draw_samples(len(dataset.traces), k, probe_samples, seed)
    firsts = [dataset.traces[int(j)].times[0] if dataset.traces[int(j)].times else None for j in np.unique(rows)]
    if any(f is None for f in firsts):
        raise ConfigError("a probed run never records a data point")
    need = max(firsts)
    if strategy == "even":
        return need * k
    return need * luby_sum(k)


# -- head-to-head comparisons --------------------------------------------------


def compare_samples(challenger: Sequence[Optional[float]], reference: Sequence[Optional[float]], dataset: Optional[TraceDataset] = None) -> WilcoxonVerdict:
    """Wilcoxon verdict of the challenger against the reference on final gaps."""
    def gaps(values):
        out = []
        for q in values:
            if q is None:
                out.append(math.inf)
            else:
                out.append(dataset.gap(q) if dataset is not None else q)
        return out

    return wilcoxon_rank_sum(gaps(challenger), gaps(reference))


def verdict_counts(verdicts: Iterable[WilcoxonVerdict]) -> dict[str, int]:
    counts = dict.fromkeys(VERDICTS, 0)
    for v in verdicts:
        counts[v.verdict] += 1
    return counts


def compare_to_f17(
    datasets: TraceDataset | Iterable[TraceDataset],
    total_budget: int,
    deciders: Sequence[str],
    samples: int,
    seed: int,
    k: int = 40,
    tau_mode: str = "zero",
    jobs: int = 1,
) -> dict[str, dict[str, WilcoxonVerdict]]:
    """Verdict of each challenger decider against F17 (same k, m = 1, t1 = k% of T)."""
    if isinstance(datasets, TraceDataset):
        datasets = [datasets]
    reference = f17_setup(k)
    table: dict[str, dict[str, WilcoxonVerdict]] = {d: {} for d in deciders}
    for j, ds in enumerate(datasets):
        rows = draw_samples(len(ds.traces), k, samples, derive_seed(seed, j))
        seeds = sample_seeds(seed, j, samples)
        ref = [r.final_quality for r in simulate(ds.traces, reference, total_budget, rows, seeds, tau_mode, jobs)]
        for d in deciders:
            setup = f17_setup(k, decider=d)
            got = [r.final_quality for r in simulate(ds.traces, setup, total_budget, rows, seeds, tau_mode, jobs)]
            table[d][ds.instance_name] = compare_samples(got, ref, ds)
    return table
