"""Derivative-free minimizers used to train perceptrons.

``sep_cma_es`` adapts a diagonal covariance matrix (separable CMA-ES);
``csa_es`` is an isotropic (mu/mu, lambda)-ES with cumulative step-size
adaptation.  Both start from the zero vector with step size 1, evaluate the
initial mean first, never exceed ``max_evaluations`` objective calls and
return the best point ever evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    evaluations: int
    best_history: list[float]  # best-so-far objective after each evaluation


class _Budgeted:
    def __init__(self, fun: Callable[[np.ndarray], float], max_evaluations: int):
        self.fun = fun
        self.max_evaluations = max_evaluations
        self.evaluations = 0
        self.best_x = None
        self.best_f = math.inf
        self.history: list[float] = []

    @property
    def exhausted(self) -> bool:
        return self.evaluations >= self.max_evaluations

    def __call__(self, x: np.ndarray) -> float:
        if self.exhausted:
            raise RuntimeError("evaluation budget exceeded")
        self.evaluations += 1
        f = float(self.fun(x))
        if not math.isfinite(f):
            f = math.inf
        if f < self.best_f or self.best_x is None:
            self.best_f, self.best_x = f, np.array(x, copy=True)
        self.history.append(self.best_f)
        return f

    def result(self) -> OptimizeResult:
        return OptimizeResult(self.best_x, self.best_f, self.evaluations, self.history)


def default_population(dim: int) -> int:
    return 4 + int(math.floor(3 * math.log(dim)))


def _evaluate_population(objective: _Budgeted, xs: np.ndarray) -> np.ndarray | None:
    fs = np.empty(len(xs))
    for j, x in enumerate(xs):
        if objective.exhausted:
            return None
        fs[j] = objective(x)
    return fs


def sep_cma_es(
    fun: Callable[[np.ndarray], float],
    dim: int,
    max_evaluations: int,
    rng: np.random.Generator,
    sigma0: float = 1.0,
) -> OptimizeResult:
    if max_evaluations < 1:
        raise ValueError("max_evaluations must be positive")
    objective = _Budgeted(fun, max_evaluations)
    mean = np.zeros(dim)
    objective(mean)

    lam = default_population(dim)
    mu = lam // 2
    weights = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    weights /= weights.sum()
    mueff = 1.0 / np.sum(weights**2)

    cs = (mueff + 2) / (dim + mueff + 5)
    ds = 1 + 2 * max(0.0, math.sqrt((mueff - 1) / (dim + 1)) - 1) + cs
    cc = (4 + mueff / dim) / (dim + 4 + 2 * mueff / dim)
    c1 = 2 / ((dim + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((dim + 2) ** 2 + mueff))
    # separable variant: the diagonal can learn (n + 2) / 3 times faster
    c1 *= (dim + 2) / 3
    cmu = min(1 - c1, cmu * (dim + 2) / 3)
    chi_n = math.sqrt(dim) * (1 - 1 / (4 * dim) + 1 / (21 * dim**2))

    sigma = sigma0
    diag_c = np.ones(dim)
    ps = np.zeros(dim)
    pc = np.zeros(dim)
    generation = 0
    while not objective.exhausted:
        z = rng.standard_normal((lam, dim))
        y = z * np.sqrt(diag_c)
        xs = mean + sigma * y
        fs = _evaluate_population(objective, xs)
        if fs is None:
            break
        order = np.argsort(fs, kind="stable")[:mu]
        y_sel, z_sel = y[order], z[order]
        y_w = weights @ y_sel
        z_w = weights @ z_sel
        mean = mean + sigma * y_w
        generation += 1

        ps = (1 - cs) * ps + math.sqrt(cs * (2 - cs) * mueff) * z_w
        ps_norm = float(np.linalg.norm(ps))
        hsig = ps_norm / math.sqrt(1 - (1 - cs) ** (2 * generation)) < (1.4 + 2 / (dim + 1)) * chi_n
        pc = (1 - cc) * pc + hsig * math.sqrt(cc * (2 - cc) * mueff) * y_w
        diag_c = (
            (1 - c1 - cmu) * diag_c
            + c1 * (pc**2 + (1 - hsig) * cc * (2 - cc) * diag_c)
            + cmu * (weights @ (y_sel**2))
        )
        sigma *= math.exp((cs / ds) * (ps_norm / chi_n - 1))
        if not np.isfinite(sigma) or sigma < 1e-300:
            break
    return objective.result()


def csa_es(
    fun: Callable[[np.ndarray], float],
    dim: int,
    max_evaluations: int,
    rng: np.random.Generator,
    sigma0: float = 1.0,
) -> OptimizeResult:
    if max_evaluations < 1:
        raise ValueError("max_evaluations must be positive")
    objective = _Budgeted(fun, max_evaluations)
    mean = np.zeros(dim)
    objective(mean)

    lam = default_population(dim)
    mu = max(1, lam // 2)
    c = 1 / math.sqrt(dim)
    damping = math.sqrt(dim)
    sigma = sigma0
    s = np.zeros(dim)
    while not objective.exhausted:
        z = rng.standard_normal((lam, dim))
        xs = mean + sigma * z
        fs = _evaluate_population(objective, xs)
        if fs is None:
            break
        order = np.argsort(fs, kind="stable")[:mu]
        z_avg = z[order].mean(axis=0)
        mean = mean + sigma * z_avg
        s = (1 - c) * s + math.sqrt(mu * c * (2 - c)) * z_avg
        sigma *= math.exp((float(s @ s) - dim) / (2 * dim * damping))
        if not np.isfinite(sigma) or sigma < 1e-300:
            break
    return objective.result()


TRAINERS = {"sep_cma_es": sep_cma_es, "csa": csa_es}
