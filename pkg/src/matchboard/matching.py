"""Maximum and maximal matchings: the ground-truth oracles for scoring.

max_matching is a layered augmenting-path (Hopcroft-Karp) search; the
brute-force enumerator is an independent oracle for cross-checking it on
small instances.  Ties are broken by lowest index everywhere so results
are deterministic.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Sequence

from .graphs import BipartiteGraph, Matching

BRUTE_FORCE_BIDDER_CAP = 12

_INF = float("inf")


class InstanceTooLargeError(ValueError):
    pass


def max_matching(g: BipartiteGraph) -> Matching:
    """A maximum-cardinality matching; every pair is an edge of g."""
    match_u = [-1] * g.num_bidders
    match_v = [-1] * g.num_items
    dist = [0.0] * g.num_bidders

    def bfs() -> bool:
        q = deque()
        for u in range(g.num_bidders):
            if match_u[u] == -1:
                dist[u] = 0.0
                q.append(u)
            else:
                dist[u] = _INF
        found = False
        while q:
            u = q.popleft()
            for v in g.adjacency[u]:
                w = match_v[v]
                if w == -1:
                    found = True
                elif dist[w] == _INF:
                    dist[w] = dist[u] + 1
                    q.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in g.adjacency[u]:
            w = match_v[v]
            if w == -1 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_u[u] = v
                match_v[v] = u
                return True
        dist[u] = _INF
        return False

    while bfs():
        for u in range(g.num_bidders):
            if match_u[u] == -1:
                dfs(u)
    pairs = tuple((u, match_u[u]) for u in range(g.num_bidders) if match_u[u] != -1)
    return Matching(pairs=pairs)


def greedy_maximal_matching(g: BipartiteGraph, order: Sequence[int] | None = None) -> Matching:
    """Scan bidders in `order` (default natural), assigning the lowest-index
    free demanded item.  The result is maximal, hence at least half of
    maximum."""
    if order is None:
        order = range(g.num_bidders)
    taken: set[int] = set()
    pairs = []
    for u in order:
        for v in g.adjacency[u]:
            if v not in taken:
                taken.add(v)
                pairs.append((u, v))
                break
    pairs.sort()
    return Matching(pairs=tuple(pairs))


def brute_force_max_matching(g: BipartiteGraph) -> int:
    """Exact maximum matching size by exhaustive assignment search.

    Independent of max_matching by construction (no shared search code);
    refuses instances with more than BRUTE_FORCE_BIDDER_CAP bidders.
    """
    n = g.num_bidders
    if n > BRUTE_FORCE_BIDDER_CAP:
        raise InstanceTooLargeError(
            f"{n} bidders exceeds brute-force cap {BRUTE_FORCE_BIDDER_CAP}"
        )
    upper = min(n, g.num_items)
    best = 0

    def explore(u: int, used: set[int], size: int) -> None:
        nonlocal best
        if size > best:
            best = size
        if best == upper or u == n or size + (n - u) <= best:
            return
        for v in g.adjacency[u]:
            if v not in used:
                used.add(v)
                explore(u + 1, used, size + 1)
                used.remove(v)
                if best == upper:
                    return
        explore(u + 1, used, size)

    explore(0, set(), 0)
    return best
