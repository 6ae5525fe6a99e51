"""TSPLIB (EUC_2D) instances and a restarted 2-opt local search."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, TextIO

import numpy as np

from betrun.errors import TraceParseError
from betrun.rng import make_rng
from betrun.trace import ImprovementTrace


class UnsupportedFormatError(TraceParseError):
    pass


@dataclass
class TspInstance:
    name: str
    coordinates: np.ndarray  # shape (n, 2)
    _dist: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.coordinates = np.asarray(self.coordinates, dtype=float).reshape(-1, 2)
        if len(self.coordinates) < 3:
            raise ValueError("a TSP instance needs at least 3 cities")

    @property
    def n(self) -> int:
        return len(self.coordinates)

    @property
    def distances(self) -> np.ndarray:
        """Rounded Euclidean distance matrix (TSPLIB ``nint``)."""
        if self._dist is None:
            diff = self.coordinates[:, None, :] - self.coordinates[None, :, :]
            self._dist = np.floor(np.sqrt((diff**2).sum(-1)) + 0.5).astype(np.int64)
        return self._dist

    def distance(self, i: int, j: int) -> int:
        return int(self.distances[i, j])

    def tour_length(self, tour) -> int:
        tour = np.asarray(tour)
        return int(self.distances[tour, np.roll(tour, -1)].sum())


def parse_tsplib(stream: TextIO | str) -> TspInstance:
    """Read the EUC_2D subset of TSPLIB."""
    text = stream if isinstance(stream, str) else stream.read()
    lines = text.splitlines()
    name, dimension, weight_type = "unnamed", None, None
    coords: list[tuple[float, float]] = []
    in_coords = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if in_coords:
            if line == "EOF" or line.endswith("_SECTION"):
                in_coords = False
                if line == "EOF":
                    break
                continue
            parts = line.split()
            if len(parts) != 3:
                raise TraceParseError(f"expected 'id x y', got {raw!r}", lineno)
            try:
                coords.append((float(parts[1]), float(parts[2])))
            except ValueError:
                raise TraceParseError(f"bad coordinate in {raw!r}", lineno) from None
            continue
        if line == "NODE_COORD_SECTION":
            if weight_type != "EUC_2D":
                raise UnsupportedFormatError(f"unsupported EDGE_WEIGHT_TYPE {weight_type!r}", lineno)
            in_coords = True
            continue
        if line == "EOF":
            break
        key, sep, value = line.partition(":")
        if not sep:
            continue
        key, value = key.strip().upper(), value.strip()
        if key == "NAME":
            name = value
        elif key == "DIMENSION":
            try:
                dimension = int(value)
            except ValueError:
                raise TraceParseError(f"bad DIMENSION {value!r}", lineno) from None
        elif key == "EDGE_WEIGHT_TYPE":
            weight_type = value
            if value != "EUC_2D":
                raise UnsupportedFormatError(f"unsupported EDGE_WEIGHT_TYPE {value!r}", lineno)
    if weight_type is None:
        raise UnsupportedFormatError("missing EDGE_WEIGHT_TYPE")
    if dimension is None:
        dimension = len(coords)
    if len(coords) != dimension:
        raise TraceParseError(f"NODE_COORD_SECTION truncated: {len(coords)} of {dimension} cities")
    return TspInstance(name, np.array(coords))


def format_tsplib(instance: TspInstance) -> str:
    out = [f"NAME : {instance.name}", "TYPE : TSP", f"DIMENSION : {instance.n}", "EDGE_WEIGHT_TYPE : EUC_2D", "NODE_COORD_SECTION"]
    out += [f"{j + 1} {x:g} {y:g}" for j, (x, y) in enumerate(instance.coordinates)]
    out.append("EOF")
    return "\n".join(out) + "\n"


def nearest_neighbor_tour(dist: np.ndarray, start: int) -> np.ndarray:
    n = len(dist)
    visited = np.zeros(n, dtype=bool)
    tour = np.empty(n, dtype=np.int64)
    tour[0] = start
    visited[start] = True
    for j in range(1, n):
        row = np.where(visited, np.iinfo(np.int64).max, dist[tour[j - 1]])
        nxt = int(np.argmin(row))
        tour[j] = nxt
        visited[nxt] = True
    return tour


def tsp_search(instance: TspInstance, rng: np.random.Generator) -> Iterator[Optional[int]]:
    """Infinite step generator; each ``next`` is one neighbor evaluation.

    Yields the new best tour length on a strict improvement, else ``None``.
    Starts from a nearest-neighbor tour, runs first-improvement 2-opt and
    restarts from a random permutation at every local optimum.
    """
    dist = instance.distances.tolist()
    n = instance.n
    tour = nearest_neighbor_tour(instance.distances, int(rng.integers(n))).tolist()
    length = instance.tour_length(tour)
    best = length
    yield best
    if n < 4:
        while True:
            yield None
    while True:
        improved = True
        while improved:
            improved = False
            for i in range(n - 2):
                a, b = tour[i], tour[i + 1]
                for j in range(i + 2, n if i else n - 1):
                    c, d = tour[j], tour[(j + 1) % n]
                    delta = dist[a][c] + dist[b][d] - dist[a][b] - dist[c][d]
                    if delta < 0:
                        tour[i + 1 : j + 1] = tour[i + 1 : j + 1][::-1]
                        length += delta
                        improved = True
                        if length < best:
                            best = length
                            yield best
                        else:
                            yield None
                        b = tour[i + 1]
                    else:
                        yield None
        tour = rng.permutation(n).tolist()
        length = instance.tour_length(tour)
        if length < best:
            best = length
            yield best
        else:
            yield None


def solve_tsp(
    instance: TspInstance,
    budget: int,
    seed: int = 0,
    emit: Optional[Callable[[int, float], None]] = None,
    run_id: str = "",
) -> ImprovementTrace:
    """Run the search for ``budget`` virtual steps (1 step = 1 ms)."""
    if budget <= 0:
        raise ValueError("budget must be positive")
    search = tsp_search(instance, make_rng(seed))
    points = []
    for step in range(1, budget + 1):
        q = next(search)
        if q is not None:
            points.append((step, float(q)))
            if emit is not None:
                emit(step, float(q))
    return ImprovementTrace.from_points(points, run_id=run_id, source="live", end_time=budget)
