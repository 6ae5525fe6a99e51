"""Trend models used by the model-based decision makers."""

from betrun.models.perceptron import FitBudget, PerceptronModel, perceptron_eval, train_perceptron
from betrun.models.polynomial import PolynomialModel, fit_polynomial_direct, fit_polynomial_lm
from betrun.models.predictors import (
    ModelSpec,
    first_last_linear,
    model_identifiers,
    parse_model_identifier,
    predict_and_select,
)
from betrun.models.preprocessing import Preprocessing, make_training_set

__all__ = [
    "FitBudget",
    "ModelSpec",
    "PerceptronModel",
    "PolynomialModel",
    "Preprocessing",
    "first_last_linear",
    "fit_polynomial_direct",
    "fit_polynomial_lm",
    "make_training_set",
    "model_identifiers",
    "parse_model_identifier",
    "perceptron_eval",
    "predict_and_select",
    "train_perceptron",
]
