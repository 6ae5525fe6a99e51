from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betrun.deciders import DecisionContext
from betrun.errors import ConfigError, FitError
from betrun.models import (
    FitBudget,
    PerceptronModel,
    Preprocessing,
    first_last_linear,
    fit_polynomial_direct,
    fit_polynomial_lm,
    make_training_set,
    model_identifiers,
    parse_model_identifier,
    perceptron_eval,
    predict_and_select,
    train_perceptron,
)
from betrun.models.perceptron import weight_count
from betrun.models.predictors import predict_run
from betrun.models.strategies import csa_es, default_population, sep_cma_es
from betrun.rng import make_rng
from betrun.trace import ImprovementTrace, TraceView


def gauss_solve(A, b):
    """Exact Gaussian elimination over the rationals."""
    n = len(b)
    M = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(A, b)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [float(M[i][n] / M[i][i]) for i in range(n)]


@pytest.mark.parametrize("degree", [1, 2, 3])
def test_direct_fit_matches_exact_elimination(degree):
    rng = np.random.default_rng(degree)
    for _ in range(20):
        x = np.sort(rng.choice(np.arange(1, 200), size=degree + 1, replace=False)).astype(float)
        y = rng.normal(0, 100, size=degree + 1)
        model = fit_polynomial_direct(list(zip(x, y)), degree)
        oracle = gauss_solve([[xi**j for j in range(degree + 1)] for xi in x], y)
        np.testing.assert_allclose(model.power_coefficients(), oracle, rtol=1e-6, atol=1e-9)


def test_direct_fit_uses_most_recent_points():
    pairs = [(0, 100.0), (1, 50.0), (2, 2.0), (3, 3.0)]
    model = fit_polynomial_direct(pairs, 1)
    assert model.evaluate(4.0) == pytest.approx(4.0)


def test_direct_fit_errors():
    with pytest.raises(FitError):
        fit_polynomial_direct([(1, 1.0)], 1)
    with pytest.raises(FitError):
        fit_polynomial_direct([(1, 1.0), (1, 2.0)], 1)


def test_lm_least_squares_matches_normal_equations():
    rng = np.random.default_rng(3)
    x = np.linspace(1, 50, 12)
    y = 3 - 0.2 * x + rng.normal(0, 1, size=12)
    model = fit_polynomial_lm(list(zip(x, y)), 1)
    A = np.vander(x, 2, increasing=True)
    ref = np.linalg.lstsq(A, y, rcond=None)[0]
    np.testing.assert_allclose(model.power_coefficients(), ref, rtol=1e-6)
    hist = model.ssr_history
    assert all(b <= a for a, b in zip(hist, hist[1:]))


def test_preprocessing_transforms_and_virtual_end_point():
    prep = Preprocessing(log_time=True, log_quality=True, virtual_end_point=True)
    view = TraceView(ImprovementTrace.from_points([(t, 100.0 - t) for t in range(1, 16)]), 20)
    pairs = make_training_set(view, 20, prep)
    assert len(pairs) == 11  # 10-point window plus the virtual end point
    assert pairs[-1] == (math.log1p(20), math.log1p(85.0))
    assert pairs[0] == (math.log1p(6), math.log1p(94.0))
    assert prep.inverse_quality(prep.forward_quality(85.0)) == pytest.approx(85.0)
    assert prep.suffix == "-logt-logq-vep"
    with pytest.raises(FitError):
        prep.forward_quality(-2.0)


def test_no_virtual_end_point_when_run_just_improved():
    prep = Preprocessing(virtual_end_point=True)
    view = TraceView(ImprovementTrace.from_points([(5, 3.0), (20, 2.0)]), 20)
    assert make_training_set(view, 20, prep) == [(5.0, 3.0), (20.0, 2.0)]


def test_identifier_grammar_round_trips():
    ids = model_identifiers()
    assert len(ids) == len(set(ids)) == 6 * 8 + 16 * 8 + 1
    for ident in ids[:-1]:
        assert parse_model_identifier(ident).identifier == ident
    with pytest.raises(ConfigError):
        parse_model_identifier("poly-1-direct-vep-logq")


def test_weight_counts_and_network_formula():
    assert [weight_count(n) for n in range(4)] == [2, 4, 7, 10]
    w = (0.5, -1.0, 2.0, 0.25, 1.5, -0.5, 0.75)  # P_2: w1 w2 b1 b2 v1 v2 c
    model = PerceptronModel(2, "tanh", w)
    x = 0.3
    expected = 1.5 * math.tanh(0.5 * x + 2.0) - 0.5 * math.tanh(-1.0 * x + 0.25) + 0.75
    assert float(perceptron_eval(model, x)) == pytest.approx(expected)
    step = PerceptronModel(1, "linear_step", (1.0, -0.5, 2.0, 1.0))
    assert float(perceptron_eval(step, 0.4)) == 1.0
    assert float(perceptron_eval(step, 0.6)) == 3.0
    assert float(perceptron_eval(PerceptronModel(0, "tanh", (2.0, 1.0)), 3.0)) == 7.0


def sphere(x):
    return float(np.sum((x - 1.5) ** 2))


@pytest.mark.parametrize("trainer", [sep_cma_es, csa_es])
def test_strategies_respect_budget_and_improve(trainer):
    calls = []

    def counted(x):
        calls.append(1)
        return sphere(x)

    res = trainer(counted, 7, 400, make_rng(1))
    assert res.evaluations == len(calls) <= 400
    assert res.fun < sphere(np.zeros(7)) / 10
    assert res.fun == min(res.best_history)
    assert all(b <= a for a, b in zip(res.best_history, res.best_history[1:]))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 60), st.integers(0, 1000))
def test_strategies_never_exceed_budget(dim, budget, seed):
    for trainer in (sep_cma_es, csa_es):
        res = trainer(sphere, dim, budget, make_rng(seed))
        assert res.evaluations <= budget
        assert res.fun <= sphere(np.zeros(dim))  # the start point is always evaluated


def test_population_size():
    assert [default_population(d) for d in (2, 4, 7, 10)] == [6, 8, 9, 10]


def test_train_perceptron_standardized_predictions_map_back():
    pairs = [(float(t), 1000.0 - 3.0 * t) for t in range(100, 110)]
    model = train_perceptron(pairs, 0, budget=FitBudget(400), seed=0, standardize=True)
    assert model.evaluations <= 400
    assert model.predict(120) == pytest.approx(640.0, rel=1e-3)


def _ctx(point_lists, budget, horizon):
    views = tuple(TraceView(ImprovementTrace.from_points(p), budget) for p in point_lists)
    return DecisionContext(views, (budget,) * len(views), horizon, 0)


def test_model_prediction_is_clamped_and_falls_back():
    spec = parse_model_identifier("poly-1-direct")
    rising = TraceView(ImprovementTrace.from_points([(1, 10.0)]), 10)
    assert predict_run(spec, rising, 10, 100, 0) == (10.0, False)
    view = TraceView(ImprovementTrace.from_points([(1, 10.0), (2, 9.0)]), 10)
    pred, fitted = predict_run(spec, view, 10, 10, 0)
    assert fitted and pred == pytest.approx(-9.0)  # slope -1 from t=2 to t=20
    vep = parse_model_identifier("poly-1-direct-vep")
    pred, fitted = predict_run(vep, view, 10, 10, 0)
    assert fitted and pred == 9.0  # flat after the virtual end point


def test_model_deciders_pick_steep_run():
    plateau = [(1000, 375.0), (3000, 365.0), (7000, 360.0)]
    steady = [(9000, 404.0), (9500, 402.0), (10000, 400.0)]
    ctx = _ctx([plateau, steady], 10_000, 70_000)
    for ident in ["poly-1-direct", "poly-2-lm", "poly-1-lm-logt", "mlp-0-tanh-cma", "mlp-0-step-csa"]:
        assert predict_and_select(ctx, parse_model_identifier(ident), 1).chosen == (1,), ident
    assert first_last_linear(ctx, 1).chosen == (1,)


def test_model_decider_is_deterministic():
    rng = np.random.default_rng(0)
    runs = [sorted({int(t): 0 for t in rng.integers(1, 5000, 12)}) for _ in range(5)]
    pts = [[(t, 500.0 - 10 * i - j * (1 + i)) for i, t in enumerate(r)] for j, r in enumerate(runs)]
    ctx = _ctx(pts, 5000, 20_000)
    spec = parse_model_identifier("mlp-2-tanh-cma-logt")
    a = predict_and_select(ctx, spec, 2)
    b = predict_and_select(ctx, spec, 2)
    assert a == b
