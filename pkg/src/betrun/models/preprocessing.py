from __future__ import annotations

import math
from dataclasses import dataclass

from betrun.errors import FitError
from betrun.trace import TraceView


@dataclass(frozen=True)
class Preprocessing:
    """How a run's trace is turned into regression pairs.

    Log transforms map ``v -> ln(1 + v)`` and are undone on predictions.
    ``virtual_end_point`` appends ``(b_i, last quality)`` when the last
    measurement happened before the run's budget ran out.
    """

    log_time: bool = False
    log_quality: bool = False
    virtual_end_point: bool = False
    window: int = 10

    def __post_init__(self):
        if self.window < 2:
            raise ValueError("training window must hold at least two points")

    def forward_time(self, t: float) -> float:
        return math.log1p(t) if self.log_time else float(t)

    def forward_quality(self, q: float) -> float:
        if not self.log_quality:
            return float(q)
        if q <= -1:
            raise FitError(f"cannot log-scale quality {q}")
        return math.log1p(q)

    def inverse_time(self, x: float) -> float:
        return math.expm1(x) if self.log_time else float(x)

    def inverse_quality(self, y: float) -> float:
        if not self.log_quality:
            return float(y)
        if y > 700:
            raise FitError("log-quality prediction overflows")
        return math.expm1(y)

    @property
    def suffix(self) -> str:
        return (
            ("-logt" if self.log_time else "")
            + ("-logq" if self.log_quality else "")
            + ("-vep" if self.virtual_end_point else "")
        )


def make_training_set(view: TraceView, budget: int, prep: Preprocessing) -> list[tuple[float, float]]:
    """Regression pairs ``(x, y)`` from the last ``prep.window`` points of a run."""
    points = view.points[-prep.window :]
    if not points:
        return []
    if prep.virtual_end_point and points[-1][0] < budget:
        points.append((budget, points[-1][1]))
    return [(prep.forward_time(t), prep.forward_quality(q)) for t, q in points]
