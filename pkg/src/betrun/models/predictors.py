"""Model-based decision makers.

Each run's recent trace is fitted with a trend model, the model is evaluated
at the time the run would reach if continued (``b_i + (T - t1) / m``), and the
runs with the best predicted quality are chosen.  Identifiers::

    poly-<1|2|3>-<direct|lm>[-logt][-logq][-vep]
    mlp-<0..3>-<tanh|step>-<cma|csa>[-logt][-logq][-vep]
    first-last-linear
"""

from __future__ import annotations

import functools
import itertools
import math
import re
from dataclasses import dataclass
from typing import Optional

from betrun.deciders import DecisionContext, DecisionOutcome, select_by_prediction
from betrun.errors import ConfigError, FitError
from betrun.models.perceptron import FitBudget, train_perceptron
from betrun.models.polynomial import fit_polynomial_direct, fit_polynomial_lm
from betrun.models.preprocessing import Preprocessing, make_training_set
from betrun.rng import derive_seed
from betrun.trace import TraceView

_FLAGS = r"(?P<logt>-logt)?(?P<logq>-logq)?(?P<vep>-vep)?"
_POLY_RE = re.compile(r"^poly-(?P<degree>[123])-(?P<method>direct|lm)" + _FLAGS + "$")
_MLP_RE = re.compile(r"^mlp-(?P<hidden>[0-3])-(?P<act>tanh|step)-(?P<trainer>cma|csa)" + _FLAGS + "$")

_ACTIVATION = {"tanh": "tanh", "step": "linear_step"}
_TRAINER = {"cma": "sep_cma_es", "csa": "csa"}


@dataclass(frozen=True)
class ModelSpec:
    kind: str  # "poly" or "mlp"
    preprocessing: Preprocessing
    degree: int = 1
    fit_method: str = "direct"
    hidden: int = 0
    activation: str = "tanh"
    trainer: str = "sep_cma_es"
    budget: FitBudget = FitBudget()

    @property
    def identifier(self) -> str:
        if self.kind == "poly":
            head = f"poly-{self.degree}-{'lm' if self.fit_method == 'levenberg_marquardt' else 'direct'}"
        else:
            act = "step" if self.activation == "linear_step" else "tanh"
            tr = "cma" if self.trainer == "sep_cma_es" else "csa"
            head = f"mlp-{self.hidden}-{act}-{tr}"
        return head + self.preprocessing.suffix


def parse_model_identifier(identifier: str) -> ModelSpec:
    m = _POLY_RE.match(identifier)
    if m:
        prep = Preprocessing(bool(m["logt"]), bool(m["logq"]), bool(m["vep"]))
        method = "levenberg_marquardt" if m["method"] == "lm" else "direct"
        return ModelSpec("poly", prep, degree=int(m["degree"]), fit_method=method)
    m = _MLP_RE.match(identifier)
    if m:
        prep = Preprocessing(bool(m["logt"]), bool(m["logq"]), bool(m["vep"]))
        return ModelSpec(
            "mlp", prep, hidden=int(m["hidden"]), activation=_ACTIVATION[m["act"]], trainer=_TRAINER[m["trainer"]]
        )
    raise ConfigError(f"unknown decider {identifier!r}")


def model_identifiers() -> list[str]:
    """Every identifier the grammar admits (polynomials, perceptrons, first-last)."""
    flags = ["".join(c) for c in itertools.product(["", "-logt"], ["", "-logq"], ["", "-vep"])]
    ids = [f"poly-{d}-{m}{f}" for d in (1, 2, 3) for m in ("direct", "lm") for f in flags]
    ids += [f"mlp-{n}-{a}-{t}{f}" for n in range(4) for a in ("tanh", "step") for t in ("cma", "csa") for f in flags]
    return ids + ["first-last-linear"]


def fit_model(spec: ModelSpec, pairs, seed: int):
    if spec.kind == "poly":
        if spec.fit_method == "direct":
            return fit_polynomial_direct(pairs, spec.degree, spec.preprocessing)
        return fit_polynomial_lm(pairs, spec.degree, spec.preprocessing)
    if len(pairs) < 1:
        raise FitError("no training data")
    return train_perceptron(
        pairs,
        spec.hidden,
        spec.activation,
        spec.trainer,
        spec.budget,
        seed=seed,
        preprocessing=spec.preprocessing,
        standardize=True,
    )


def _clamp(prediction: float, last: float) -> float:
    return min(prediction, last)


def predict_run(spec: ModelSpec, view: TraceView, budget: int, horizon: int, seed: int) -> tuple[Optional[float], bool]:
    """Predicted quality of one run at ``budget + horizon``.

    Returns ``(prediction, fitted)``; ``fitted`` is False when the fit failed
    and the last measured quality was used instead.
    """
    last = view.last_quality
    if last is None:
        return None, False
    try:
        pairs = make_training_set(view, budget, spec.preprocessing)
        model = fit_model(spec, pairs, seed)
        pred = model.predict(budget + horizon)
    except (FitError, OverflowError, ValueError):
        return last, False
    if not math.isfinite(pred):
        return last, False
    return _clamp(pred, last), True


def predict_and_select(ctx: DecisionContext, spec: ModelSpec, m: int) -> DecisionOutcome:
    preds = [
        predict_run(spec, view, b, ctx.horizon_per_run, derive_seed(ctx.rng_seed, j))[0]
        for j, (view, b) in enumerate(zip(ctx.views, ctx.budgets))
    ]
    return select_by_prediction(preds, m)


def first_last_linear_prediction(view: TraceView, budget: int, horizon: int) -> Optional[float]:
    last = view.last_quality
    if last is None or view.count < 1:
        return last
    t0, q0 = view.trace.times[0], view.trace.qualities[0]
    if t0 >= budget:
        return last
    slope = (last - q0) / (budget - t0)
    return _clamp(last + slope * horizon, last)


def first_last_linear(ctx: DecisionContext, m: int) -> DecisionOutcome:
    """Line from the first measured point to the virtual end point ``(b_i, q_last)``."""
    preds = [first_last_linear_prediction(v, b, ctx.horizon_per_run) for v, b in zip(ctx.views, ctx.budgets)]
    return select_by_prediction(preds, m)


@functools.lru_cache(maxsize=None)
def model_decider(identifier: str):
    if identifier == "first-last-linear":
        return first_last_linear
    spec = parse_model_identifier(identifier)

    def decide(ctx: DecisionContext, m: int) -> DecisionOutcome:
        return predict_and_select(ctx, spec, m)

    decide.__name__ = identifier
    return decide
