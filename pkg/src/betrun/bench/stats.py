"""Two-sided Wilcoxon rank-sum (Mann-Whitney) test with exact small-sample path."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

SIGNIFICANCE = 0.05
EXACT_LIMIT = 12  # use the exact null distribution when |a| + |b| <= this

VERDICTS = ("better", "worse", "identical", "insignificant")


@dataclass(frozen=True)
class WilcoxonVerdict:
    """Outcome of comparing sample ``a`` against ``b`` (smaller is better)."""

    verdict: str
    p_value: float
    statistic: float  # rank sum of ``a``
    method: str  # "exact", "normal" or "identical"


def midranks(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2 + 1
        for pos in range(i, j + 1):
            ranks[order[pos]] = rank
        i = j + 1
    return ranks


def exact_p_value(doubled_ranks: Sequence[int], n1: int, observed: int) -> float:
    """P(|S - E| >= |observed - E|) over all size-``n1`` subsets of the ranks.

    Works on doubled midranks so every sum is an integer and the comparison
    is exact.  Counts subsets per (size, sum) by dynamic programming.
    """
    total = sum(doubled_ranks)
    counts: list[dict[int, int]] = [dict() for _ in range(n1 + 1)]
    counts[0][0] = 1
    for r in doubled_ranks:
        for size in range(n1, 0, -1):
            src = counts[size - 1]
            dst = counts[size]
            for s, c in src.items():
                dst[s + r] = dst.get(s + r, 0) + c
    n = len(doubled_ranks)
    # E[S] = n1 * total / n; compare n * S against n1 * total to stay in integers
    center = n1 * total
    obs_dev = abs(n * observed - center)
    hits = sum(c for s, c in counts[n1].items() if abs(n * s - center) >= obs_dev)
    return hits / math.comb(n, n1)


def normal_p_value(n1: int, n2: int, rank_sum: float, tie_sizes: Sequence[int]) -> float:
    """Normal approximation with tie and continuity correction."""
    n = n1 + n2
    u = rank_sum - n1 * (n1 + 1) / 2
    mu = n1 * n2 / 2
    tie_term = sum(t**3 - t for t in tie_sizes) / (n * (n - 1)) if n > 1 else 0.0
    var = n1 * n2 / 12 * ((n + 1) - tie_term)
    if var <= 0:
        return 1.0
    z = max(0.0, abs(u - mu) - 0.5) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2)))


def wilcoxon_rank_sum(
    a: Sequence[float], b: Sequence[float], alpha: float = SIGNIFICANCE, method: str = "auto"
) -> WilcoxonVerdict:
    """Compare ``a`` with ``b`` where smaller values are better.

    ``method`` is ``auto`` (exact up to 12 observations in total), ``exact``
    or ``normal``.  The verdict is ``identical`` when both samples hold the
    same multiset of values or all values coincide.
    """
    if not a or not b:
        raise ValueError("both samples need at least one value")
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    n1, n2 = len(a), len(b)
    ranks = midranks(a + b)
    rank_sum = sum(ranks[:n1])
    if sorted(a) == sorted(b) or len(set(a + b)) == 1:
        return WilcoxonVerdict("identical", 1.0, rank_sum, "identical")
    if method == "auto":
        method = "exact" if n1 + n2 <= EXACT_LIMIT else "normal"
    if method == "exact":
        doubled = [int(round(2 * r)) for r in ranks]
        p = exact_p_value(doubled, n1, sum(doubled[:n1]))
    elif method == "normal":
        ties = [c for c in Counter(a + b).values() if c > 1]
        p = normal_p_value(n1, n2, rank_sum, ties)
    else:
        raise ValueError(f"unknown method {method!r}")
    if p < alpha:
        # mean rank of a below that of b means a holds the smaller (better) values
        verdict = "better" if rank_sum / n1 < (sum(ranks) - rank_sum) / n2 else "worse"
    else:
        verdict = "insignificant"
    return WilcoxonVerdict(verdict, p, rank_sum, method)
