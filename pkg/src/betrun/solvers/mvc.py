"""Minimum vertex cover instances and an exchange-based local search."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional, TextIO

import numpy as np

from betrun.errors import TraceParseError, TraceValidationError
from betrun.rng import make_rng
from betrun.trace import ImprovementTrace


@dataclass
class MvcInstance:
    name: str
    vertex_count: int
    edges: list[tuple[int, int]]  # 0-based, u < v, no duplicates

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u == v:
                raise TraceValidationError(f"self-loop on vertex {u + 1}")
            if (u, v) in seen:
                raise TraceValidationError(f"duplicate edge {u + 1}-{v + 1}")
            seen.add((u, v))

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def is_cover(self, cover) -> bool:
        cover = set(cover)
        return all(u in cover or v in cover for u, v in self.edges)


def parse_edge_list(stream: TextIO | str, name: str = "graph") -> MvcInstance:
    """Lines ``u v`` with 1-based vertex ids; ``#`` starts a comment."""
    text = stream if isinstance(stream, str) else stream.read()
    edges = set()
    n = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TraceParseError(f"expected 'u v', got {raw!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise TraceParseError(f"vertex ids must be integers: {raw!r}", lineno) from None
        if u <= 0 or v <= 0:
            raise TraceParseError(f"vertex ids start at 1: {raw!r}", lineno)
        if u == v:
            raise TraceValidationError(f"line {lineno}: self-loop on vertex {u}")
        edges.add((min(u, v) - 1, max(u, v) - 1))
        n = max(n, u, v)
    return MvcInstance(name, n, sorted(edges))


def greedy_cover(instance: MvcInstance) -> set[int]:
    """Repeatedly take the vertex covering the most uncovered edges."""
    adj = instance.adjacency()
    degree = np.array([len(a) for a in adj], dtype=np.int64)
    cover: set[int] = set()
    while degree.max(initial=0) > 0:
        v = int(np.argmax(degree))
        cover.add(v)
        degree[v] = 0
        for u in adj[v]:
            if u not in cover:
                degree[u] -= 1
    return cover


def _redundant(v: int, adj, in_cover) -> bool:
    return all(in_cover[u] for u in adj[v])


def mvc_search(instance: MvcInstance, rng: np.random.Generator) -> Iterator[Optional[int]]:
    """Infinite step generator; one exchange attempt per ``next``.

    A step drops a random cover vertex, re-covers its now uncovered edges by
    adding their other endpoints in random order, then prunes vertices made
    redundant.  The new cover is kept if it is not larger than the old one.
    """
    adj = instance.adjacency()
    in_cover = [False] * instance.vertex_count
    for v in greedy_cover(instance):
        in_cover[v] = True
    for v in rng.permutation(instance.vertex_count).tolist():
        if in_cover[v] and _redundant(v, adj, in_cover):
            in_cover[v] = False
    cover = [v for v in range(instance.vertex_count) if in_cover[v]]
    size = best = len(cover)
    assert instance.is_cover(cover)
    yield best
    while True:
        if not cover:
            yield None
            continue
        v = cover[int(rng.integers(len(cover)))]
        in_cover[v] = False
        added = [u for u in adj[v] if not in_cover[u]]
        rng.shuffle(added)
        for u in added:
            in_cover[u] = True
        removed = [v]
        candidates = set(added)
        for u in added:
            candidates.update(w for w in adj[u] if in_cover[w])
        for w in sorted(candidates):
            if in_cover[w] and _redundant(w, adj, in_cover):
                in_cover[w] = False
                removed.append(w)
        new_size = size + len(added) - len(removed)
        if new_size <= size:
            cover = [w for w in range(instance.vertex_count) if in_cover[w]]
            size = new_size
        else:
            for w in removed:
                in_cover[w] = True
            for u in added:
                in_cover[u] = False
        if size < best:
            best = size
            assert instance.is_cover(cover), "emitted cover must cover every edge"
            yield best
        else:
            yield None


def solve_mvc(
    instance: MvcInstance,
    budget: int,
    seed: int = 0,
    emit: Optional[Callable[[int, float], None]] = None,
    run_id: str = "",
) -> ImprovementTrace:
    if budget <= 0:
        raise ValueError("budget must be positive")
    search = mvc_search(instance, make_rng(seed))
    points = []
    for step in range(1, budget + 1):
        q = next(search)
        if q is not None:
            points.append((step, float(q)))
            if emit is not None:
                emit(step, float(q))
    return ImprovementTrace.from_points(points, run_id=run_id, source="live", end_time=budget)
