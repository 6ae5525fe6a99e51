"""Improvement traces: representation, validation and file I/O.

A trace is the ordered list of ``(time_ms, quality)`` points at which one
minimizing run improved its best-so-far quality.  Text format, one point per
line::

    # optional comments
    # end_ms=60000          (optional: how long the recorded run lasted)
    1,1520
    17,1490.5

A dataset is a directory holding one trace file per run plus an optional
``meta`` file with ``instance_name=`` and ``quality_bound=`` lines.
"""

from __future__ import annotations

import bisect
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, TextIO

from betrun.errors import TraceParseError, TraceValidationError

SOURCES = ("replay", "live", "synthetic")
TRACE_SUFFIX = ".trace"
META_NAME = "meta"

_INT_RE = re.compile(r"^[0-9]+$")
_DECIMAL_RE = re.compile(r"^[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?$")
_END_RE = re.compile(r"^#\s*end_ms\s*=\s*([0-9]+)\s*$")


def parse_quality(text: str) -> float:
    text = text.strip()
    if not _DECIMAL_RE.match(text):
        raise ValueError(f"not a base-10 decimal: {text!r}")
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"quality out of range: {text!r}")
    return value


def format_quality(q: float) -> str:
    """Shortest text that parses back to exactly ``q``."""
    if q.is_integer() and abs(q) < 2**53:
        return str(int(q))
    return repr(float(q))


@dataclass(frozen=True)
class ImprovementTrace:
    """Strictly improving ``(time, quality)`` points of one run.

    Times are integer milliseconds >= 1 and strictly increasing; qualities are
    strictly decreasing.  ``end_time`` optionally records how long the
    underlying run lasted, which lets replay flag queries past the recording.
    """

    times: tuple[int, ...] = ()
    qualities: tuple[float, ...] = ()
    run_id: str = ""
    source: str = "replay"
    end_time: Optional[int] = None

    def __post_init__(self):
        times = tuple(int(t) for t in self.times)
        qualities = tuple(float(q) for q in self.qualities)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "qualities", qualities)
        if len(times) != len(qualities):
            raise TraceValidationError("times and qualities differ in length")
        if self.source not in SOURCES:
            raise TraceValidationError(f"unknown trace source {self.source!r}")
        for j, (t, q) in enumerate(zip(times, qualities)):
            if t < 1:
                raise TraceValidationError(f"point {j} ({t},{q}): time must be >= 1 ms")
            if not math.isfinite(q):
                raise TraceValidationError(f"point {j} ({t},{q}): quality must be finite")
            if j:
                tp, qp = times[j - 1], qualities[j - 1]
                if t <= tp:
                    raise TraceValidationError(f"time not increasing: ({tp},{qp}) then ({t},{q})")
                if q >= qp:
                    raise TraceValidationError(f"quality not improving: ({tp},{qp}) then ({t},{q})")
        if self.end_time is not None and times and self.end_time < times[-1]:
            raise TraceValidationError(f"end_ms={self.end_time} precedes last point at {times[-1]}")

    @classmethod
    def from_points(cls, points: Iterable[tuple[int, float]], **kwargs) -> "ImprovementTrace":
        pts = list(points)
        return cls(tuple(p[0] for p in pts), tuple(p[1] for p in pts), **kwargs)

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.times, self.qualities))

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        return iter(zip(self.times, self.qualities))


@dataclass(frozen=True)
class TraceView:
    """A trace truncated at ``horizon``: only points with time <= horizon exist."""

    trace: ImprovementTrace
    horizon: int

    @property
    def count(self) -> int:
        return bisect.bisect_right(self.trace.times, self.horizon)

    @property
    def times(self) -> tuple[int, ...]:
        return self.trace.times[: self.count]

    @property
    def qualities(self) -> tuple[float, ...]:
        return self.trace.qualities[: self.count]

    @property
    def points(self) -> list[tuple[int, float]]:
        n = self.count
        return list(zip(self.trace.times[:n], self.trace.qualities[:n]))

    @property
    def last_quality(self) -> Optional[float]:
        n = self.count
        return self.trace.qualities[n - 1] if n else None

    @property
    def last_time(self) -> Optional[int]:
        n = self.count
        return self.trace.times[n - 1] if n else None

    def __len__(self) -> int:
        return self.count


def quality_at(view: TraceView, t: int) -> Optional[float]:
    """Best quality known at time ``t``; ``None`` before the first point."""
    n = bisect.bisect_right(view.trace.times, min(t, view.horizon))
    return view.trace.qualities[n - 1] if n else None


def final_quality(trace: ImprovementTrace, budget: int) -> Optional[float]:
    return quality_at(TraceView(trace, budget), budget)


@dataclass
class TraceDataset:
    instance_name: str
    traces: list[ImprovementTrace] = field(default_factory=list)
    quality_bound: Optional[float] = None

    def __len__(self) -> int:
        return len(self.traces)

    def gap(self, quality: float) -> float:
        """Relative gap to the bound if one is known, else the raw quality."""
        if self.quality_bound is None or self.quality_bound == 0:
            return quality
        return (quality - self.quality_bound) / self.quality_bound


# -- text I/O -----------------------------------------------------------------


def parse_trace(stream: TextIO | str, run_id: str = "", source: str = "replay") -> ImprovementTrace:
    """Read one trace file; errors carry the 1-based line number."""
    text = stream if isinstance(stream, str) else stream.read()
    times: list[int] = []
    qualities: list[float] = []
    end_time = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _END_RE.match(line)
            if m:
                end_time = int(m.group(1))
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise TraceParseError(f"expected 'time_ms,quality', got {raw!r}", lineno)
        t_text, q_text = parts[0].strip(), parts[1].strip()
        if not _INT_RE.match(t_text):
            raise TraceParseError(f"time is not a base-10 integer: {t_text!r}", lineno)
        try:
            q = parse_quality(q_text)
        except ValueError as exc:
            raise TraceParseError(str(exc), lineno) from None
        t = int(t_text)
        if t < 1:
            raise TraceValidationError(f"line {lineno}: time must be >= 1 ms, got {t}")
        if times and t <= times[-1]:
            raise TraceValidationError(
                f"line {lineno}: time not increasing: ({times[-1]},{format_quality(qualities[-1])}) then ({t_text},{q_text})"
            )
        if qualities and q >= qualities[-1]:
            raise TraceValidationError(
                f"line {lineno}: quality not improving: ({times[-1]},{format_quality(qualities[-1])}) then ({t_text},{q_text})"
            )
        times.append(t)
        qualities.append(q)
    return ImprovementTrace(tuple(times), tuple(qualities), run_id=run_id, source=source, end_time=end_time)


def serialize_trace(trace: ImprovementTrace) -> str:
    lines = []
    if trace.end_time is not None:
        lines.append(f"# end_ms={trace.end_time}")
    lines.extend(f"{t},{format_quality(q)}" for t, q in trace)
    return "".join(line + "\n" for line in lines)


def read_trace(path: str | Path, source: str = "replay") -> ImprovementTrace:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        try:
            return parse_trace(fh, run_id=path.stem, source=source)
        except TraceParseError as exc:
            raise TraceParseError(f"{path}: {exc}") from None


def write_trace(trace: ImprovementTrace, path: str | Path) -> None:
    Path(path).write_text(serialize_trace(trace), encoding="utf-8")


def _trace_files(directory: Path) -> list[Path]:
    return sorted(
        p for p in directory.iterdir() if p.is_file() and p.name != META_NAME and not p.name.startswith(".")
    )


def read_dataset(directory: str | Path, source: str = "replay") -> TraceDataset:
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {directory}")
    name = directory.name
    bound = None
    meta = directory / META_NAME
    if meta.exists():
        for lineno, raw in enumerate(meta.read_text(encoding="utf-8").splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise TraceParseError(f"{meta}: expected key=value", lineno)
            key, value = key.strip(), value.strip()
            if key == "instance_name":
                name = value
            elif key == "quality_bound":
                try:
                    bound = parse_quality(value)
                except ValueError as exc:
                    raise TraceParseError(f"{meta}: {exc}", lineno) from None
    traces = [read_trace(p, source=source) for p in _trace_files(directory)]
    return TraceDataset(name, traces, bound)


def write_dataset(dataset: TraceDataset, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = [f"instance_name={dataset.instance_name}"]
    if dataset.quality_bound is not None:
        meta.append(f"quality_bound={format_quality(dataset.quality_bound)}")
    (directory / META_NAME).write_text("\n".join(meta) + "\n", encoding="utf-8")
    width = max(5, len(str(len(dataset.traces))))
    paths = []
    for j, trace in enumerate(dataset.traces, start=1):
        path = directory / f"run_{j:0{width}d}{TRACE_SUFFIX}"
        write_trace(trace, path)
        paths.append(path)
    return paths


def views_at(traces: Sequence[ImprovementTrace], horizons: Sequence[int]) -> list[TraceView]:
    return [TraceView(tr, h) for tr, h in zip(traces, horizons)]
