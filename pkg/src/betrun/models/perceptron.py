"""Single-input perceptron regressors ``P_n`` trained by evolution strategies.

Weight layout (flat vector):

* ``n = 0``: ``[slope, bias]`` so the output is ``slope * x + bias``.
* ``n >= 1``: ``[w_1..w_n, b_1..b_n, v_1..v_n, c]`` so the output is
  ``sum_j v_j * act(w_j * x + b_j) + c``.  The output node is always linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from betrun.errors import FitError
from betrun.models.preprocessing import Preprocessing
from betrun.models.strategies import TRAINERS
from betrun.rng import make_rng

ACTIVATIONS = ("tanh", "linear_step")
DEFAULT_MAX_EVALUATIONS = 400
DEFAULT_TRAINING_WINDOW = 10


@dataclass(frozen=True)
class FitBudget:
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS
    training_window: int = DEFAULT_TRAINING_WINDOW

    def __post_init__(self):
        if self.max_evaluations < 1 or self.training_window < 1:
            raise ValueError("fit budget entries must be positive")


def weight_count(hidden: int) -> int:
    return 2 if hidden == 0 else 3 * hidden + 1


def linear_step(x):
    return np.where(np.asarray(x) < 0, 0.0, 1.0)


def _activate(activation: str, x):
    if activation == "tanh":
        return np.tanh(x)
    if activation == "linear_step":
        return linear_step(x)
    raise ValueError(f"unknown activation {activation!r}")


def network_output(weights: np.ndarray, hidden: int, activation: str, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if hidden == 0:
        return weights[0] * x + weights[1]
    w = weights[:hidden]
    b = weights[hidden : 2 * hidden]
    v = weights[2 * hidden : 3 * hidden]
    c = weights[3 * hidden]
    h = _activate(activation, np.multiply.outer(x, w) + b)
    return h @ v + c


@dataclass(frozen=True)
class PerceptronModel:
    hidden_nodes: int
    activation: str
    weights: tuple[float, ...]
    preprocessing: Preprocessing = field(default_factory=Preprocessing)
    trainer: str = "sep_cma_es"
    evaluations: int = 0
    mse: float = float("nan")
    # standardization applied around the network: x' = (x - x_shift) / x_scale, y likewise
    x_shift: float = 0.0
    x_scale: float = 1.0
    y_shift: float = 0.0
    y_scale: float = 1.0

    def __post_init__(self):
        if self.hidden_nodes not in (0, 1, 2, 3):
            raise ValueError("hidden_nodes must be 0..3")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if len(self.weights) != weight_count(self.hidden_nodes):
            raise ValueError(f"P_{self.hidden_nodes} needs {weight_count(self.hidden_nodes)} weights")

    def evaluate(self, x: float) -> float:
        """Model-space prediction, undoing the standardization."""
        xs = (x - self.x_shift) / self.x_scale
        return float(perceptron_eval(self, xs)) * self.y_scale + self.y_shift

    def predict(self, t: float) -> float:
        prep = self.preprocessing
        y = self.evaluate(prep.forward_time(t))
        if not np.isfinite(y):
            raise FitError("non-finite perceptron prediction")
        return prep.inverse_quality(y)


def perceptron_eval(model: PerceptronModel, x):
    """Raw network output for input ``x`` (no standardization)."""
    return network_output(np.asarray(model.weights, dtype=float), model.hidden_nodes, model.activation, x)


def train_perceptron(
    pairs: Sequence[tuple[float, float]],
    hidden: int,
    activation: str = "tanh",
    trainer: str = "sep_cma_es",
    budget: Optional[FitBudget] = None,
    seed: int = 0,
    preprocessing: Optional[Preprocessing] = None,
    standardize: bool = False,
) -> PerceptronModel:
    """Fit ``P_hidden`` to ``pairs`` by minimizing mean squared error.

    With ``standardize`` the inputs and targets are z-scored before training
    and the returned model maps back to the original scale.
    """
    if not pairs:
        raise FitError("no training data")
    if trainer not in TRAINERS:
        raise ValueError(f"unknown trainer {trainer!r}")
    budget = budget or FitBudget()
    data = np.asarray(pairs, dtype=float)
    x, y = data[:, 0], data[:, 1]
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError("non-finite training data")
    x_shift, x_scale, y_shift, y_scale = 0.0, 1.0, 0.0, 1.0
    if standardize:
        x_shift, y_shift = float(x.mean()), float(y.mean())
        x_scale = float(x.std()) or 1.0
        y_scale = float(y.std()) or 1.0
        x = (x - x_shift) / x_scale
        y = (y - y_shift) / y_scale

    def mse(w):
        err = network_output(w, hidden, activation, x) - y
        return float(np.mean(err * err))

    dim = weight_count(hidden)
    result = TRAINERS[trainer](mse, dim, budget.max_evaluations, make_rng(seed))
    return PerceptronModel(
        hidden,
        activation,
        tuple(float(w) for w in result.x),
        preprocessing or Preprocessing(),
        trainer,
        result.evaluations,
        result.fun,
        x_shift,
        x_scale,
        y_shift,
        y_scale,
    )
