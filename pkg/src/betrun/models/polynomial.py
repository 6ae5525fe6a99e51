"""Polynomial trend models: exact interpolation and Levenberg-Marquardt fits.

Both fits work in a normalized abscissa ``u = (x - shift) / scale`` to keep
the Vandermonde matrices well conditioned at millisecond-sized times.
``PolynomialModel.power_coefficients`` expands back to the plain basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np

from betrun.errors import FitError
from betrun.models.preprocessing import Preprocessing

LM_INITIAL_DAMPING = 1e-3
LM_DAMPING_FACTOR = 10.0
LM_MAX_ITERATIONS = 100
LM_RELATIVE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PolynomialModel:
    degree: int
    coefficients: tuple[float, ...]  # ascending powers of the normalized abscissa
    x_shift: float = 0.0
    x_scale: float = 1.0
    preprocessing: Preprocessing = field(default_factory=Preprocessing)
    fit_method: str = "direct"
    ssr_history: tuple[float, ...] = ()

    def evaluate(self, x) -> np.ndarray | float:
        """Value at model-space abscissa ``x`` (after any log transform)."""
        u = (np.asarray(x, dtype=float) - self.x_shift) / self.x_scale
        return np.polynomial.polynomial.polyval(u, self.coefficients)

    def power_coefficients(self) -> np.ndarray:
        """Coefficients of ``sum_j a_j x**j`` in the model-space abscissa."""
        out = np.zeros(self.degree + 1)
        s, h = self.x_shift, self.x_scale
        for j, c in enumerate(self.coefficients):
            # c * ((x - s) / h)**j expanded binomially
            for i in range(j + 1):
                out[i] += c * comb(j, i) * (-s) ** (j - i) / h**j
        return out

    def predict(self, t: float) -> float:
        prep = self.preprocessing
        y = float(self.evaluate(prep.forward_time(t)))
        if not np.isfinite(y):
            raise FitError("non-finite polynomial prediction")
        return prep.inverse_quality(y)


def _normalization(x: np.ndarray) -> tuple[float, float]:
    shift = float(np.mean(x))
    scale = float(np.max(np.abs(x - shift)))
    return shift, (scale if scale > 0 else 1.0)


def _vandermonde(u: np.ndarray, degree: int) -> np.ndarray:
    return np.vander(u, degree + 1, increasing=True)


def fit_polynomial_direct(
    pairs: Sequence[tuple[float, float]], degree: int, preprocessing: Optional[Preprocessing] = None
) -> PolynomialModel:
    """Interpolate the ``degree + 1`` most recent pairs exactly."""
    if degree not in (1, 2, 3):
        raise ValueError("degree must be 1, 2 or 3")
    if len(pairs) < degree + 1:
        raise FitError(f"need {degree + 1} points for a degree-{degree} interpolation, have {len(pairs)}")
    data = np.asarray(pairs[-(degree + 1) :], dtype=float)
    x, y = data[:, 0], data[:, 1]
    if len(np.unique(x)) != len(x):
        raise FitError("duplicate abscissae make the interpolation degenerate")
    shift, scale = _normalization(x)
    A = _vandermonde((x - shift) / scale, degree)
    try:
        coef = np.linalg.solve(A, y)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"singular interpolation system: {exc}") from None
    if not np.all(np.isfinite(coef)):
        raise FitError("non-finite interpolation coefficients")
    return PolynomialModel(
        degree, tuple(float(c) for c in coef), shift, scale, preprocessing or Preprocessing(), "direct"
    )


def levenberg_marquardt(residuals, jacobian, p0: np.ndarray):
    """Minimize ``sum(residuals(p)**2)`` with Marquardt-scaled damping.

    Damping starts at 1e-3, is multiplied by 10 after a rejected step and
    divided by 10 after an accepted one.  Stops after 100 iterations or once an
    accepted step changes the sum of squares by less than 1e-9 relative.
    Returns the parameters and the sum of squares after every accepted step.
    """
    p = np.array(p0, dtype=float)
    r = residuals(p)
    ssr = float(r @ r)
    history = [ssr]
    lam = LM_INITIAL_DAMPING
    for _ in range(LM_MAX_ITERATIONS):
        if ssr == 0.0:
            break
        J = jacobian(p)
        JtJ = J.T @ J
        g = J.T @ r
        diag = np.diag(JtJ).copy()
        diag[diag <= 0] = 1e-12
        try:
            step = np.linalg.solve(JtJ + lam * np.diag(diag), -g)
        except np.linalg.LinAlgError:
            lam *= LM_DAMPING_FACTOR
            continue
        candidate = p + step
        r_new = residuals(candidate)
        ssr_new = float(r_new @ r_new)
        if not np.isfinite(ssr_new) or not np.all(np.isfinite(candidate)):
            raise FitError("non-finite value during Levenberg-Marquardt iteration")
        if ssr_new < ssr:
            change = (ssr - ssr_new) / ssr
            p, r, ssr = candidate, r_new, ssr_new
            history.append(ssr)
            lam /= LM_DAMPING_FACTOR
            if change < LM_RELATIVE_TOLERANCE:
                break
        else:
            lam *= LM_DAMPING_FACTOR
            if lam > 1e16:
                break
    return p, history


def fit_polynomial_lm(
    pairs: Sequence[tuple[float, float]],
    degree: int,
    preprocessing: Optional[Preprocessing] = None,
) -> PolynomialModel:
    """Least-squares polynomial over all given pairs, zero-initialized."""
    if degree not in (1, 2, 3):
        raise ValueError("degree must be 1, 2 or 3")
    if len(pairs) < 2:
        raise FitError("least-squares fit needs at least two points")
    data = np.asarray(pairs, dtype=float)
    x, y = data[:, 0], data[:, 1]
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError("non-finite training data")
    shift, scale = _normalization(x)
    A = _vandermonde((x - shift) / scale, degree)
    coef, history = levenberg_marquardt(lambda p: A @ p - y, lambda p: A, np.zeros(degree + 1))
    return PolynomialModel(
        degree,
        tuple(float(c) for c in coef),
        shift,
        scale,
        preprocessing or Preprocessing(),
        "levenberg_marquardt",
        tuple(history),
    )
