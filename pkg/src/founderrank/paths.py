"""Warm-introduction paths between a founder and an investor.

Edges are walked in either direction, and only minimum-hop paths count. A
hop's strength is the number of emails exchanged either way between its
two ends. Among the shortest paths, the k strongest win; equal strengths
are ordered by node sequence.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .errors import UnknownNode
from .graph import CommGraph

DEFAULT_MAX_HOPS = 4
DEFAULT_K = 3


@dataclass(frozen=True)
class IntroPath:
    nodes: tuple[str, ...]
    total_strength: int

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1

    def sort_key(self):
        return (-self.total_strength, self.nodes)

    def to_dict(self) -> dict:
        return {"nodes": list(self.nodes), "hops": self.hops, "total_strength": self.total_strength}


def _levels(g: CommGraph, source: str, limit: int) -> dict[str, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if dist[u] == limit:
            continue
        for v in g.neighbors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def top_intro_paths(g: CommGraph, founder: str, investor: str,
                    max_hops: int = DEFAULT_MAX_HOPS, k: int = DEFAULT_K) -> list[IntroPath]:
    for node in (founder, investor):
        if node not in g:
            raise UnknownNode(f"{node} is not in the graph")
    if founder == investor:
        raise ValueError("founder and investor must differ")
    if k < 1 or max_hops < 1:
        raise ValueError("k and max_hops must be positive")
    dist = _levels(g, founder, max_hops)
    if investor not in dist:
        return []
    target_level = dist[investor]

    # k best partial paths into each node, processed level by level; the
    # ranking key survives extension because every path into a node of
    # level l has the same length
    best: dict[str, list[tuple[int, tuple[str, ...]]]] = {founder: [(0, (founder,))]}
    frontier = [founder]
    for level in range(1, target_level + 1):
        nxt: dict[str, list] = {}
        for u in frontier:
            for v in g.neighbors(u):
                if dist.get(v) != level:
                    continue
                if level == target_level and v != investor:
                    continue
                w = g.strength(u, v)
                bucket = nxt.setdefault(v, [])
                bucket.extend((s + w, seq + (v,)) for s, seq in best[u])
        for v, bucket in nxt.items():
            bucket.sort(key=lambda item: (-item[0], item[1]))
            del bucket[k:]
        best.update(nxt)
        frontier = sorted(nxt)
    return [IntroPath(seq, s) for s, seq in best.get(investor, [])]


def firm_intro_paths(g: CommGraph, founder: str, firm_investors: Iterable[str],
                     max_hops: int = DEFAULT_MAX_HOPS, k: int = DEFAULT_K) -> list[IntroPath]:
    """Best paths to any partner of a firm: fewest hops, then strength.

    Investors without a graph node are skipped.
    """
    investors = sorted(set(firm_investors))
    if not investors:
        raise ValueError("firm has no investors")
    if founder not in g:
        raise UnknownNode(f"{founder} is not in the graph")
    found: list[IntroPath] = []
    for inv in investors:
        if inv not in g or inv == founder:
            continue
        found.extend(top_intro_paths(g, founder, inv, max_hops, k))
    found.sort(key=lambda p: (p.hops, -p.total_strength, p.nodes))
    return found[:k]
