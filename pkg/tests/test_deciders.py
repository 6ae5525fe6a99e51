from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betrun.deciders import (
    DecisionContext,
    DiminishingReturnsState,
    current_best,
    current_worst,
    diminishing_returns,
    diminishing_returns_prediction,
    is_known_decider,
    log_time_sum,
    most_improvements,
    random_choice,
    resolve_decider,
)
from betrun.errors import ConfigError
from betrun.trace import ImprovementTrace, TraceView


def ctx_of(point_lists, budgets, horizon=1000, seed=0):
    views = tuple(TraceView(ImprovementTrace.from_points(p), b) for p, b in zip(point_lists, budgets))
    return DecisionContext(views, tuple(budgets), horizon, seed)


def test_current_best_and_worst():
    ctx = ctx_of([[(1, 9)], [(1, 3)], [], [(1, 5)]], [10] * 4)
    assert current_best(ctx, 2).chosen == (1, 3)
    assert current_worst(ctx, 1).chosen == (2,)  # a run without data ranks worst
    assert current_worst(ctx, 2).chosen == (2, 0)


def test_most_improvements_normalizes_by_log_budget():
    # 3 points in 10 ms vs 4 points in 1000 ms: 3/ln 11 > 4/ln 1001
    ctx = ctx_of([[(1, 9), (2, 8), (3, 7)], [(1, 9), (2, 8), (3, 7), (4, 6)]], [10, 1000])
    assert most_improvements(ctx, 1).chosen == (0,)
    assert 3 / math.log(11) > 4 / math.log(1001)


def test_log_time_sum_prefers_late_improvements():
    ctx = ctx_of([[(2, 9), (3, 8)], [(1, 9), (50, 8)]], [100, 100])
    assert log_time_sum(ctx, 1).chosen == (1,)


def test_random_is_seeded():
    ctx = ctx_of([[(1, 1)]] * 10, [10] * 10, seed=5)
    first = random_choice(ctx, 3).chosen
    assert first == random_choice(ctx, 3).chosen
    assert len(set(first)) == 3
    picks = {random_choice(ctx_of([[(1, 1)]] * 10, [10] * 10, seed=s), 1).chosen for s in range(50)}
    assert len(picks) > 5


def dr_hand_oracle(points, end_time):
    """Literal step-by-step forecast written independently of the library."""
    (t3, q3), (t2, q2), (t1, q1) = points[-3:]
    dq = min(0.95, (q2 - q1) / (q3 - q2))
    dt = max(1.05, (t1 - t2) / (t2 - t3))
    imp, gap, now, q = q2 - q1, t1 - t2, t1, q1
    while True:
        imp = math.ceil(round(imp * dq, 9))
        gap = math.ceil(round(gap * dt, 9))
        now += gap
        if now > end_time or imp < 1:
            return q
        q -= imp


def test_diminishing_returns_worked_example():
    # dq = 5/10 = 0.5 and dt = 4000/2000 = 2: gains 3 at 15000, 2 at 31000, 1 at 63000, next at 127000
    pts = [(1000, 375), (3000, 365), (7000, 360)]
    view = TraceView(ImprovementTrace.from_points(pts), 10_000)
    state = DiminishingReturnsState.from_view(view)
    assert (state.dq, state.dt) == (0.5, 2.0)
    assert diminishing_returns_prediction(view, 80_000) == 354
    assert diminishing_returns_prediction(view, 63_000) == 354
    assert diminishing_returns_prediction(view, 62_999) == 355
    assert dr_hand_oracle(pts, 80_000) == 354


def test_diminishing_returns_caps_ratios():
    # equal steps: dq is capped to 0.95 and dt raised to 1.05
    pts = [(100, 30), (200, 28), (300, 26)]
    view = TraceView(ImprovementTrace.from_points(pts), 300)
    state = DiminishingReturnsState.from_view(view)
    assert (state.dq, state.dt) == (0.95, 1.05)
    assert diminishing_returns_prediction(view, 1000) == dr_hand_oracle(pts, 1000)


def test_diminishing_returns_with_few_points_uses_last_quality():
    view = TraceView(ImprovementTrace.from_points([(1, 10), (2, 9)]), 100)
    assert diminishing_returns_prediction(view, 10_000) == 9
    assert diminishing_returns_prediction(TraceView(ImprovementTrace.from_points([]), 5), 10) is None


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.integers(1, 400), min_size=3, max_size=3),
    st.lists(st.integers(1, 50), min_size=2, max_size=2),
    st.integers(0, 200_000),
)
def test_diminishing_returns_matches_hand_oracle(gaps, drops, horizon):
    t = [gaps[0], gaps[0] + gaps[1], gaps[0] + gaps[1] + gaps[2]]
    q = [1000, 1000 - drops[0], 1000 - drops[0] - drops[1]]
    pts = list(zip(t, q))
    view = TraceView(ImprovementTrace.from_points(pts), t[-1])
    assert diminishing_returns_prediction(view, t[-1] + horizon) == dr_hand_oracle(pts, t[-1] + horizon)


def test_diminishing_returns_decider_picks_steady_over_plateau():
    plateau = [(1000, 375), (3000, 365), (7000, 360)]
    steady = [(9000, 404), (9500, 402), (10000, 400)]
    ctx = ctx_of([plateau, steady], [10_000, 10_000], horizon=70_000)
    assert current_best(ctx, 1).chosen == (0,)
    assert diminishing_returns(ctx, 1).chosen == (1,)


def test_resolve_decider():
    assert resolve_decider("current-best") is current_best
    assert is_known_decider("poly-2-lm-logt-vep")
    assert is_known_decider("mlp-3-step-csa-logq")
    for bad in ["poly-4-direct", "mlp-4-tanh-cma", "poly-1-direct-vep-logt", "best", ""]:
        assert not is_known_decider(bad)
    with pytest.raises(ConfigError, match="unknown decider"):
        resolve_decider("nope")


def test_diminishing_returns_short_horizon_example():
    # improvements 8 then 4 (dq 0.5), gaps 100 then 200 (dt 2), 700 ms left: +2 at +400 fits, +1 at +1200 does not
    pts = [(1000, 100), (1100, 92), (1300, 88)]
    ctx = ctx_of([pts], [1300], horizon=700)
    assert diminishing_returns(ctx, 1).predictions == (86,)


def test_random_choice_is_uniform():
    counts = [0] * 4
    ctx = ctx_of([[(1, 1)]] * 4, [10] * 4)
    for seed in range(100_000):
        counts[random_choice(DecisionContext(ctx.views, ctx.budgets, 10, seed), 1).chosen[0]] += 1
    assert all(abs(c / 100_000 - 0.25) <= 0.01 for c in counts)


trace_lists = st.lists(
    st.lists(st.tuples(st.integers(1, 100), st.integers(1, 1000)), max_size=6).map(
        lambda pts: [(t, q) for t, q in sorted(dict(pts).items())]
    ).map(lambda pts: [p for i, p in enumerate(pts) if all(p[1] < o[1] for o in pts[:i])]),
    min_size=1,
    max_size=6,
)


@settings(max_examples=150, deadline=None)
@given(trace_lists, st.data())
def test_every_decider_returns_m_distinct_indices(traces, data):
    k = len(traces)
    m = data.draw(st.integers(1, k))
    ctx = ctx_of(traces, [100] * k, horizon=500, seed=data.draw(st.integers(0, 10**6)))
    for name in ["current-best", "current-worst", "random", "most-improvements", "log-time-sum",
                 "diminishing-returns", "poly-1-direct", "poly-2-lm-vep", "first-last-linear"]:
        out = resolve_decider(name)(ctx, m)
        assert len(out.chosen) == m == len(set(out.chosen))
        assert all(0 <= c < k for c in out.chosen)
        assert out == resolve_decider(name)(ctx, m)


@settings(max_examples=100, deadline=None)
@given(trace_lists, st.integers(2, 50))
def test_selection_invariant_under_positive_scaling(traces, factor):
    k = len(traces)
    scaled = [[(t, q * factor) for t, q in pts] for pts in traces]
    a, b = ctx_of(traces, [100] * k), ctx_of(scaled, [100] * k)
    for fn in (current_best, current_worst, most_improvements, log_time_sum):
        assert fn(a, 1).chosen == fn(b, 1).chosen


@settings(max_examples=100, deadline=None)
@given(trace_lists)
def test_current_best_matches_sort_oracle(traces):
    k = len(traces)
    ctx = ctx_of(traces, [100] * k)
    last = [pts[-1][1] if pts else None for pts in traces]
    order = sorted(range(k), key=lambda i: (last[i] is None, last[i] or 0, i))
    assert current_best(ctx, k).chosen == tuple(order)
    worst = sorted(range(k), key=lambda i: (last[i] is not None, -(last[i] or 0), i))
    assert current_worst(ctx, k).chosen == tuple(worst)
