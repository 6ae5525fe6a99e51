"""Trace datasets with analytically known structure, shared by the tests."""

from __future__ import annotations

from math import comb

from betrun.solvers.synthetic import SyntheticCurveSpec, generate_synthetic
from betrun.trace import ImprovementTrace, TraceDataset


def shifted(trace: ImprovementTrace, offset: float, run_id: str) -> ImprovementTrace:
    return ImprovementTrace(trace.times, tuple(q + offset for q in trace.qualities), run_id=run_id,
                            source=trace.source, end_time=trace.end_time)


def synthetic_dataset(n: int = 60, horizon: int = 20_000, seed: int = 0, name: str = "syn") -> TraceDataset:
    """Power-law runs with jittered parameters; no designed structure."""
    traces = []
    for j in range(n):
        spec = SyntheticCurveSpec(900 + (j * 37) % 50, 400 + (j * 53) % 200, 0.3 + 0.01 * (j % 20),
                                  gap_mean=15, gap_growth=1.002, horizon=horizon, seed=seed * 1000 + j)
        traces.append(generate_synthetic(spec, run_id=f"r{j}"))
    return TraceDataset(name, traces, 850.0)


# -- two populations crossing between t1/k and T - t1 + t1/k -------------------

CROSS_T, CROSS_T1, CROSS_K = 100_000, 20_000, 2
EARLY_SPEC = SyntheticCurveSpec(1000, 1000, 0.5, gap_mean=40, gap_growth=1.002, quantum=0.01, seed=11)
LATE_SPEC = SyntheticCurveSpec(900, 20000, 0.5, gap_mean=40, gap_growth=1.002, quantum=0.01, seed=12)


def crossing_dataset(per_population: int = 500) -> TraceDataset:
    """Half the runs lead at ``t1/k`` and trail at ``T - t1 + t1/k``.

    Runs inside a population are copies shifted by multiples of 0.01, so they
    never cross each other.  A k=2 sample crosses exactly when it is mixed,
    which happens with probability ``n / (2n - 1)``.
    """
    early = generate_synthetic(EARLY_SPEC)
    late = generate_synthetic(LATE_SPEC)
    traces = []
    for j in range(per_population):
        traces.append(shifted(early, 0.01 * j, f"early{j}"))
        traces.append(shifted(late, 0.01 * j, f"late{j}"))
    return TraceDataset("crossing", traces)


def crossing_switch_probability(per_population: int = 500) -> float:
    return per_population / (2 * per_population - 1)


# -- plateauing vs steadily improving runs -------------------------------------

PLATEAU_T, PLATEAU_T1, PLATEAU_K = 100_000, 30_000, 3
PLATEAU_COUNT, STEADY_COUNT = 27, 73


def plateau_trace(offset: float, run_id: str) -> ImprovementTrace:
    pts = [(1, 1000), (10, 500), (100, 400), (1000, 375), (3000, 365), (7000, 360), (15000, 357), (40000, 355)]
    return ImprovementTrace.from_points([(t, q + offset) for t, q in pts], run_id=run_id, end_time=PLATEAU_T)


def steady_trace(offset: float, run_id: str) -> ImprovementTrace:
    pts = [(500 * j, 440 - 2 * j + offset) for j in range(1, 171)]
    return ImprovementTrace.from_points(pts, run_id=run_id, end_time=PLATEAU_T)


def plateau_dataset() -> TraceDataset:
    """Plateauing runs lead at ``b_i`` but steady runs win after ``T - t1`` more ms."""
    traces = [plateau_trace(0.25 * j, f"plateau{j}") for j in range(PLATEAU_COUNT)]
    traces += [steady_trace(0.25 * j, f"steady{j}") for j in range(STEADY_COUNT)]
    return TraceDataset("plateau", traces)


def plateau_mismatch_probability() -> float:
    """Chance that a k=3 sample mixes both kinds, i.e. the early best is not the final best."""
    n = PLATEAU_COUNT + STEADY_COUNT
    k = PLATEAU_K
    return 1 - (comb(PLATEAU_COUNT, k) + comb(STEADY_COUNT, k)) / comb(n, k)
