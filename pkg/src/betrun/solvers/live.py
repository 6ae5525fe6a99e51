"""Pausable live runs backed by the step generators of the toy solvers."""

from __future__ import annotations

import math
import time
from typing import Iterator, Optional

from betrun.trace import ImprovementTrace, TraceView

CLOCKS = ("virtual", "wall")


class LiveRun:
    """Drives a solver step generator under a virtual or wall clock.

    Under the virtual clock one step costs one millisecond, which makes runs
    reproducible per seed.  Under the wall clock improvements are stamped with
    elapsed milliseconds of consumed run time (not reproducible).
    """

    def __init__(self, search: Iterator[Optional[float]], run_id: str = "", clock: str = "virtual"):
        if clock not in CLOCKS:
            raise ValueError(f"unknown clock {clock!r}")
        self.search = search
        self.run_id = run_id
        self.clock = clock
        self.consumed = 0
        self._times: list[int] = []
        self._qualities: list[float] = []
        self._trace: Optional[ImprovementTrace] = None

    def _record(self, t: int, q: float) -> None:
        if self._times and t <= self._times[-1]:
            # several improvements inside one millisecond: keep the best
            self._qualities[-1] = q
        else:
            self._times.append(t)
            self._qualities.append(q)
        self._trace = None

    def advance(self, ms: int) -> None:
        if self.clock == "virtual":
            for _ in range(ms):
                self.consumed += 1
                q = next(self.search)
                if q is not None:
                    self._record(self.consumed, float(q))
            return
        start = time.perf_counter()
        base = self.consumed
        while True:
            elapsed = (time.perf_counter() - start) * 1000.0
            if elapsed >= ms:
                break
            q = next(self.search)
            if q is not None:
                stamp = min(base + ms, base + max(1, math.ceil((time.perf_counter() - start) * 1000.0)))
                self._record(stamp, float(q))
        self.consumed = base + ms

    def trace(self) -> ImprovementTrace:
        if self._trace is None:
            self._trace = ImprovementTrace(tuple(self._times), tuple(self._qualities), run_id=self.run_id, source="live")
        return self._trace

    def view(self) -> TraceView:
        return TraceView(self.trace(), self.consumed)

    @property
    def exhausted(self) -> bool:
        return False
