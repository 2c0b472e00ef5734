"""Graph metrics behind FounderRank: PageRank, betweenness, closeness.

All three treat the graph as directed with unit hop cost; email counts
are ignored. Each raw metric is min-max scaled to [0, 1] over the whole
node population before it is used as a ranking feature.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import NonConvergence
from .graph import CommGraph

DEFAULT_DAMPING = 0.85
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000

METRIC_NAMES = ("pagerank", "betweenness", "closeness")


@dataclass(frozen=True)
class MetricVector:
    node_id: str
    pagerank: float
    betweenness: float
    closeness: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.pagerank, self.betweenness, self.closeness)


def _require_nodes(g: CommGraph) -> None:
    if len(g) == 0:
        raise ValueError("graph has no nodes")


def pagerank(g: CommGraph, damping: float = DEFAULT_DAMPING, tol: float = DEFAULT_TOL,
             max_iter: int = DEFAULT_MAX_ITER) -> dict[str, float]:
    """PageRank by power iteration; scores sum to 1.

    Dangling nodes spread their mass uniformly. Stops once the L1 change
    between iterates drops below ``tol``.
    """
    _require_nodes(g)
    if not 0 < damping < 1:
        raise ValueError("damping must be in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = len(g)
    index = g.index
    src = np.fromiter((index[s] for s, _ in g.edges), dtype=np.int64, count=g.number_of_edges())
    dst = np.fromiter((index[d] for _, d in g.edges), dtype=np.int64, count=g.number_of_edges())
    out_deg = np.bincount(src, minlength=n).astype(float)
    dangling = out_deg == 0
    share = np.zeros(n)
    share[~dangling] = 1.0 / out_deg[~dangling]

    x = np.full(n, 1.0 / n)
    residual = float("inf")
    for _ in range(max_iter):
        spread = np.bincount(dst, weights=x[src] * share[src], minlength=n)
        new = damping * (spread + x[dangling].sum() / n) + (1.0 - damping) / n
        new /= new.sum()
        residual = float(np.abs(new - x).sum())
        x = new
        if residual < tol:
            return {node: float(x[i]) for i, node in enumerate(g.nodes)}
    raise NonConvergence(max_iter, residual)


def _bfs(g: CommGraph, source: str):
    """Hop distances, shortest-path counts, predecessors, and visit order."""
    dist = {source: 0}
    sigma = {source: 1}
    preds: dict[str, list[str]] = {source: []}
    order = []
    queue = deque([source])
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in g.successors(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                sigma[v] = 0
                preds[v] = []
                queue.append(v)
            if dist[v] == dist[u] + 1:
                sigma[v] += sigma[u]
                preds[v].append(u)
    return dist, sigma, preds, order


def betweenness(g: CommGraph) -> dict[str, float]:
    """Directed betweenness (Brandes accumulation), normalized by (N-1)(N-2)."""
    _require_nodes(g)
    score = dict.fromkeys(g.nodes, 0.0)
    for s in g.nodes:
        _, sigma, preds, order = _bfs(g, s)
        delta = dict.fromkeys(order, 0.0)
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                score[w] += delta[w]
    n = len(g)
    if n < 3:
        return dict.fromkeys(g.nodes, 0.0)
    norm = 1.0 / ((n - 1) * (n - 2))
    return {v: score[v] * norm for v in g.nodes}


def closeness(g: CommGraph) -> dict[str, float]:
    """Harmonic closeness over outgoing hop distances, divided by N-1.

    Unreachable nodes contribute 0, so disconnected graphs are fine.
    """
    _require_nodes(g)
    n = len(g)
    if n == 1:
        return {g.nodes[0]: 0.0}
    out = {}
    for v in g.nodes:
        dist, *_ = _bfs(g, v)
        out[v] = sum(1.0 / d for d in dist.values() if d > 0) / (n - 1)
    return out


def scale_unit(values: Mapping[str, float]) -> dict[str, float]:
    """Min-max scale into [0, 1]; a constant input maps to all zeros."""
    if not values:
        raise ValueError("nothing to scale")
    arr = np.array(list(values.values()), dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("values must be finite")
    lo, hi = float(arr.min()), float(arr.max())
    if hi == lo:
        return dict.fromkeys(values, 0.0)
    span = hi - lo
    return {k: (float(v) - lo) / span for k, v in values.items()}


@dataclass(frozen=True)
class MetricTable:
    """Raw and unit-scaled metrics for every node of a graph."""

    raw: dict[str, MetricVector]
    scaled: dict[str, MetricVector]

    def get(self, node: str) -> MetricVector:
        """Scaled metrics for ``node``; nodes outside the graph score zero."""
        return self.scaled.get(node) or MetricVector(node, 0.0, 0.0, 0.0)


def compute_metrics(g: CommGraph, damping: float = DEFAULT_DAMPING,
                    tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> MetricTable:
    pr = pagerank(g, damping, tol, max_iter)
    bc = betweenness(g)
    cc = closeness(g)
    pr_s, bc_s, cc_s = scale_unit(pr), scale_unit(bc), scale_unit(cc)
    raw = {n: MetricVector(n, pr[n], bc[n], cc[n]) for n in g.nodes}
    scaled = {n: MetricVector(n, pr_s[n], bc_s[n], cc_s[n]) for n in g.nodes}
    return MetricTable(raw, scaled)


METRICS_FIELDS = ["node_id", "pagerank", "betweenness", "closeness",
                  "pagerank_raw", "betweenness_raw", "closeness_raw"]


def metric_rows(table: MetricTable) -> list[dict]:
    rows = []
    for node in sorted(table.scaled):
        s, r = table.scaled[node], table.raw[node]
        rows.append({
            "node_id": node,
            "pagerank": repr(s.pagerank), "betweenness": repr(s.betweenness), "closeness": repr(s.closeness),
            "pagerank_raw": repr(r.pagerank), "betweenness_raw": repr(r.betweenness),
            "closeness_raw": repr(r.closeness),
        })
    return rows


def table_from_rows(rows) -> MetricTable:
    raw, scaled = {}, {}
    for row in rows:
        n = row["node_id"]
        scaled[n] = MetricVector(n, float(row["pagerank"]), float(row["betweenness"]), float(row["closeness"]))
        raw[n] = MetricVector(n, float(row.get("pagerank_raw", row["pagerank"])),
                              float(row.get("betweenness_raw", row["betweenness"])),
                              float(row.get("closeness_raw", row["closeness"])))
    return MetricTable(raw, scaled)
