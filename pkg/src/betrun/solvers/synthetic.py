"""Synthetic anytime traces following ``q(t) = q_inf + a * t**(-c)``."""

from __future__ import annotations

import math
from dataclasses import dataclass

from betrun.rng import make_rng
from betrun.trace import ImprovementTrace


@dataclass(frozen=True)
class SyntheticCurveSpec:
    """Power-law quality curve plus a random improvement-time process.

    Candidate improvement times start at ``first_time``; each following gap is
    ``ceil(Exp(gap_mean * gap_growth**j))`` ms (at least 1).  The curve value
    at each candidate time is rounded to a multiple of ``quantum`` and kept
    only if it strictly improves on the previous point.
    """

    q_inf: float
    amplitude: float
    decay: float
    gap_mean: float = 20.0
    gap_growth: float = 1.0
    first_time: int = 1
    horizon: int = 100_000
    quantum: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.amplitude <= 0 or self.decay <= 0:
            raise ValueError("amplitude and decay must be positive")
        if self.gap_mean <= 0 or self.gap_growth <= 0 or self.quantum <= 0:
            raise ValueError("gap_mean, gap_growth and quantum must be positive")
        if not 1 <= self.first_time <= self.horizon:
            raise ValueError("first_time must lie in 1..horizon")

    def curve(self, t: float) -> float:
        return self.q_inf + self.amplitude * t ** (-self.decay)


def quantize(value: float, quantum: float) -> float:
    return round(value / quantum) * quantum


def generate_synthetic(spec: SyntheticCurveSpec, run_id: str = "") -> ImprovementTrace:
    rng = make_rng(spec.seed)
    points = []
    t = spec.first_time
    j = 0
    while t <= spec.horizon:
        q = quantize(spec.curve(t), spec.quantum)
        if not points or q < points[-1][1]:
            points.append((t, q))
        gap = rng.exponential(spec.gap_mean * spec.gap_growth**j)
        t += max(1, math.ceil(gap))
        j += 1
    return ImprovementTrace.from_points(points, run_id=run_id, source="synthetic", end_time=spec.horizon)


def crossing_time(first: SyntheticCurveSpec, second: SyntheticCurveSpec) -> float:
    """Time at which two equal-decay power-law curves intersect.

    Solves ``q1 + a1 t^-c = q2 + a2 t^-c``; raises if the decays differ or the
    curves never meet at positive time.
    """
    if first.decay != second.decay:
        raise ValueError("closed form needs equal decay exponents")
    dq = second.q_inf - first.q_inf
    da = first.amplitude - second.amplitude
    if dq == 0 or da == 0 or (dq > 0) != (da > 0):
        raise ValueError("curves do not cross")
    return (da / dq) ** (1.0 / first.decay)
