"""Community detection on the communication graph.

Label propagation is asynchronous: every node starts with its own label,
nodes are visited in a seeded random order, and each one takes the most
common label among its neighbors (direction ignored, each neighbor counted
once). A node keeps its label when that label is among the most common;
otherwise ties are broken by a seeded uniform draw.

Label classes are finally split into connected pieces, so every reported
community is internally connected. Community ids are the smallest member.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass

from .errors import NonConvergence
from .graph import FOUNDER, CommGraph

DEFAULT_MAX_ITER = 100


@dataclass(frozen=True)
class Partition:
    assignment: dict[str, str]
    communities: dict[str, frozenset]

    @classmethod
    def from_groups(cls, groups) -> "Partition":
        communities = {}
        assignment = {}
        for members in groups:
            members = frozenset(members)
            if not members:
                continue
            cid = min(members)
            communities[cid] = members
            for m in members:
                assignment[m] = cid
        return cls(dict(sorted(assignment.items())), dict(sorted(communities.items())))

    def __len__(self) -> int:
        return len(self.communities)


def _connected_pieces(g: CommGraph, members: set[str]) -> list[set[str]]:
    pieces = []
    left = set(members)
    while left:
        start = min(left)
        piece = {start}
        stack = [start]
        left.discard(start)
        while stack:
            u = stack.pop()
            for v in g.neighbors(u):
                if v in left:
                    left.discard(v)
                    piece.add(v)
                    stack.append(v)
        pieces.append(piece)
    return pieces


def _split_connected(g: CommGraph, labels: dict[str, str]) -> Partition:
    groups: dict[str, set[str]] = {}
    for node, lab in labels.items():
        groups.setdefault(lab, set()).add(node)
    pieces = []
    for members in groups.values():
        pieces.extend(_connected_pieces(g, members))
    return Partition.from_groups(pieces)


def label_propagation(g: CommGraph, seed: int = 0, max_iter: int = DEFAULT_MAX_ITER) -> Partition:
    if len(g) == 0:
        return Partition({}, {})
    rng = random.Random(seed)
    labels = {n: n for n in g.nodes}
    order = list(g.nodes)
    for _ in range(max_iter):
        rng.shuffle(order)
        changed = False
        for node in order:
            neighbors = g.neighbors(node)
            if not neighbors:
                continue
            counts = Counter(labels[v] for v in neighbors)
            top = max(counts.values())
            best = sorted(lab for lab, c in counts.items() if c == top)
            if labels[node] in best:
                continue
            labels[node] = best[0] if len(best) == 1 else rng.choice(best)
            changed = True
        if not changed:
            return _split_connected(g, labels)
    raise NonConvergence(max_iter, partial=_split_connected(g, labels))


def louvain(g: CommGraph, seed: int = 0) -> Partition:
    """Modularity-based alternative backend (undirected, unweighted)."""
    import networkx as nx

    if len(g) == 0:
        return Partition({}, {})
    ug = nx.Graph()
    ug.add_nodes_from(g.nodes)
    ug.add_edges_from(g.edges)
    groups = nx.community.louvain_communities(ug, weight=None, seed=seed)
    pieces = []
    for members in groups:
        pieces.extend(_connected_pieces(g, set(members)))
    return Partition.from_groups(pieces)


@dataclass(frozen=True)
class CommunityStats:
    count: int
    mean_founders: float
    top: list  # (community id, founder count, size)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean_founders": self.mean_founders,
            "top": [{"community": c, "founders": f, "size": s} for c, f, s in self.top],
        }


def community_stats(p: Partition, labels: dict[str, str], top_k: int = 3) -> CommunityStats:
    """Count communities, average founders per community, and the top-k by founders."""
    missing = [n for n in p.assignment if n not in labels]
    if missing:
        raise ValueError(f"no label for {len(missing)} partition nodes, e.g. {missing[0]}")
    rows = []
    for cid, members in p.communities.items():
        founders = sum(1 for m in members if labels[m] == FOUNDER)
        rows.append((cid, founders, len(members)))
    count = len(rows)
    mean = sum(f for _, f, _ in rows) / count if count else 0.0
    rows.sort(key=lambda r: (-r[1], r[0]))
    return CommunityStats(count, mean, rows[:top_k])
