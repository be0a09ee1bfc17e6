"""Local clusters on the percolated ring and the free-node predicates.

The local cluster of v is the contiguous arc reachable from v over retained
ring edges; the L-truncated variant follows at most L retained ring edges in
each direction.  Free-node predicates ask whether a candidate node is far
enough along the ring from everything already touched for its truncated
cluster to be guaranteed collision-free.
"""

from __future__ import annotations

from bisect import bisect_left, insort

import numpy as np

from .graphs import PercolationGraph


def ring_distance(n: int, i: int, j: int) -> int:
    """Hop distance between i and j on the n-cycle: min(|i-j|, n-|i-j|)."""
    d = abs(i - j) % n
    return min(d, n - d)


def expected_truncated_size(p: float, L: int) -> float:
    """Exact expected size of an L-truncated local cluster on a long ring.

    Strictly increasing in L; tends to (1+p)/(1-p) as L grows.
    """
    if not 0 <= p < 1:
        raise ValueError("need 0 <= p < 1 (the expectation diverges at p=1)")
    if L < 1:
        raise ValueError("need L >= 1")
    return (1 + p) / (1 - p) - 2 * p ** (L + 1) / (1 - p)


def local_cluster(gp: PercolationGraph, v: int) -> set:
    """Maximal set reachable from v via retained ring edges (includes v)."""
    return truncated_local_cluster(gp, v, gp.n)


def truncated_local_cluster(gp: PercolationGraph, v: int, L: int) -> set:
    """Nodes reachable from v using at most L retained ring edges per
    direction; at most 2L+1 nodes."""
    n = gp.n
    ring = gp.ring_active
    out = {v % n}
    steps = min(L, n - 1)
    # rightward: edge {v+i, v+i+1} has index (v+i) mod n
    for i in range(steps):
        if not ring[(v + i) % n]:
            break
        out.add((v + i + 1) % n)
    # leftward: edge {v-i-1, v-i} has index (v-i-1) mod n
    for i in range(steps):
        if not ring[(v - i - 1) % n]:
            break
        out.add((v - i - 1) % n)
    return out


class RingOccupancy:
    """Sorted set of ring positions supporting nearest-distance queries.

    Visits issue many freeness queries against a growing set of touched
    nodes; bisection over the sorted positions answers each in O(log n).
    """

    def __init__(self, n: int, positions=()):
        self.n = n
        self.pos = sorted(set(int(p) % n for p in positions))

    def add(self, x: int) -> None:
        x = int(x) % self.n
        i = bisect_left(self.pos, x)
        if i == len(self.pos) or self.pos[i] != x:
            insort(self.pos, x)

    def min_distance(self, x: int) -> int:
        """Ring distance from x to the nearest occupied position
        (n if empty)."""
        pos = self.pos
        if not pos:
            return self.n
        x = int(x) % self.n
        i = bisect_left(pos, x)
        left = pos[i - 1] if i > 0 else pos[-1]
        right = pos[i] if i < len(pos) else pos[0]
        return min(ring_distance(self.n, x, left), ring_distance(self.n, x, right))

    def __contains__(self, x: int) -> bool:
        i = bisect_left(self.pos, int(x) % self.n)
        return i < len(self.pos) and self.pos[i] == int(x) % self.n

    def __len__(self) -> int:
        return len(self.pos)


def is_free(g, x: int, X, L: int) -> bool:
    """True iff x is at ring distance >= L+1 from every node of X,
    measured on the un-percolated cycle."""
    n = g.n
    return all(ring_distance(n, x, y) >= L + 1 for y in X)


def is_free_parallel(g, x: int, X, A, L: int) -> bool:
    """Freeness for the parallel visit: x in X must be at ring distance
    >= L+1 from every node of A and >= 2L+1 from every other node of X."""
    if x not in X:
        raise ValueError("x must belong to X")
    n = g.n
    if any(ring_distance(n, x, a) < L + 1 for a in A):
        return False
    return all(ring_distance(n, x, y) >= 2 * L + 1 for y in X if y != x)


# ---------------------------------------------------------------------------
# vectorized Monte Carlo helper
# ---------------------------------------------------------------------------

def _capped_run_lengths(mask: np.ndarray, L: int) -> np.ndarray:
    """For each i, the number of consecutive True entries in the circular
    mask starting at i, capped at L."""
    n = len(mask)
    if mask.all():
        return np.full(n, min(L, n), dtype=np.int64)
    mm = np.concatenate([mask, mask[: min(L, n)]])
    zeros = np.flatnonzero(~mm)
    idx = np.searchsorted(zeros, np.arange(n))
    idx = np.minimum(idx, len(zeros) - 1)
    nxt = zeros[idx]
    nxt = np.where(nxt >= np.arange(n), nxt, n + min(L, n))
    return np.minimum(nxt - np.arange(n), L)


def mean_truncated_size_mc(n: int, p: float, L: int, trials: int,
                           rng: np.random.Generator) -> float:
    """Monte Carlo estimate of E[|LC^L(v)|] on an n-ring: percolate the ring
    `trials` times and average the truncated cluster size over all nodes."""
    total = 0.0
    for _ in range(trials):
        mask = rng.random(n) < p
        right = _capped_run_lengths(mask, L)
        # left runs from v use edges v-1, v-2, ...: reverse-orientation runs
        left = _capped_run_lengths(mask[::-1], L)[::-1]
        left = np.roll(left, 1)  # edge v-1 is position n-1-v in reversed order
        total += 1.0 + right.mean() + left.mean()
    return total / trials
