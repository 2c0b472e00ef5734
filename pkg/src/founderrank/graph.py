"""Directed weighted communication graph, deltas, and the snapshot format.

Nodes carry role flags (``founder``, ``investor``, ``employed_by_fund``);
the displayed label is derived from the flags with :func:`resolve_label`,
so Founder/Investor exclusivity holds by construction.

Node ids are normalized email addresses or public-person ids. Public ids
carry the ``pub:`` prefix; ``:`` never appears in a valid address so the
two namespaces cannot collide.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

from .errors import CorruptSnapshot, InputError, UnsupportedVersion

PERSON = "Person"
FOUNDER = "Founder"
INVESTOR = "Investor"
LABELS = (PERSON, FOUNDER, INVESTOR)

FLAG_FOUNDER = "founder"
FLAG_INVESTOR = "investor"
FLAG_FUND = "employed_by_fund"
FLAGS = (FLAG_FOUNDER, FLAG_INVESTOR, FLAG_FUND)

PUBLIC_PREFIX = "pub:"

SNAPSHOT_MAGIC = "founderrank-graph"
SNAPSHOT_VERSION = 1

Edge = tuple[str, str]


def public_id(raw: str) -> str:
    """Namespace a public-person id so it can share a graph with addresses."""
    return raw if raw.startswith(PUBLIC_PREFIX) else PUBLIC_PREFIX + raw


def resolve_label(is_founder: bool, is_investor: bool, employed_by_fund: bool) -> str:
    """Collapse role flags into one label.

    A person who is both a founder and an investor counts as an Investor
    only while employed by an institutional fund.
    """
    if is_founder and is_investor:
        return INVESTOR if employed_by_fund else FOUNDER
    if is_investor:
        return INVESTOR
    if is_founder:
        return FOUNDER
    return PERSON


def label_from_flags(flags: Iterable[str]) -> str:
    flags = set(flags)
    return resolve_label(FLAG_FOUNDER in flags, FLAG_INVESTOR in flags, FLAG_FUND in flags)


def _check_id(node: str) -> None:
    if not isinstance(node, str) or not node or any(c in node for c in "\t\n\r"):
        raise InputError(f"invalid node id {node!r}")


@dataclass(frozen=True)
class GraphDelta:
    """Edge-weight increments plus role flags to merge into a graph."""

    edge_increments: Mapping[Edge, int] = field(default_factory=dict)
    new_labels: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        for (src, dst), w in self.edge_increments.items():
            if not isinstance(w, int) or w <= 0:
                raise ValueError(f"increment for {src}->{dst} must be a positive integer, got {w!r}")
        for node, flags in self.new_labels.items():
            unknown = set(flags) - set(FLAGS)
            if unknown:
                raise ValueError(f"unknown flags {sorted(unknown)} for {node}")

    def is_empty(self) -> bool:
        return not self.edge_increments and not self.new_labels

    def total_weight(self) -> int:
        return sum(self.edge_increments.values())

    def merge(self, other: "GraphDelta") -> "GraphDelta":
        """Combine two deltas; associative and commutative."""
        edges = dict(self.edge_increments)
        for key, w in other.edge_increments.items():
            edges[key] = edges.get(key, 0) + w
        labels = {k: frozenset(v) for k, v in self.new_labels.items()}
        for node, flags in other.new_labels.items():
            labels[node] = labels.get(node, frozenset()) | frozenset(flags)
        return GraphDelta(edges, labels)

    def to_dict(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "edges": [[s, d, w] for (s, d), w in sorted(self.edge_increments.items())],
            "labels": {n: sorted(f) for n, f in sorted(self.new_labels.items())},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "GraphDelta":
        if data.get("version") != SNAPSHOT_VERSION:
            raise UnsupportedVersion(f"delta version {data.get('version')!r}")
        try:
            edges: dict[Edge, int] = {}
            for s, d, w in data.get("edges", []):
                edges[(s, d)] = edges.get((s, d), 0) + int(w)
            labels = {n: frozenset(f) for n, f in data.get("labels", {}).items()}
            return cls(edges, labels)
        except (TypeError, ValueError) as exc:
            raise CorruptSnapshot(f"bad delta payload: {exc}") from exc


class CommGraph:
    """Immutable directed graph with positive integer edge weights."""

    def __init__(self, flags: Mapping[str, Iterable[str]] | None = None,
                 edges: Mapping[Edge, int] | None = None):
        node_flags = {n: frozenset(f) for n, f in (flags or {}).items()}
        edge_map: dict[Edge, int] = {}
        for (src, dst), w in (edges or {}).items():
            if src == dst:
                raise ValueError(f"self-loop on {src}")
            if not isinstance(w, int) or w < 1:
                raise ValueError(f"weight of {src}->{dst} must be a positive integer, got {w!r}")
            for n in (src, dst):
                node_flags.setdefault(n, frozenset())
            edge_map[(src, dst)] = w
        for n, f in node_flags.items():
            _check_id(n)
            unknown = set(f) - set(FLAGS)
            if unknown:
                raise ValueError(f"unknown flags {sorted(unknown)} for {n}")
        self._flags = node_flags
        self._edges = edge_map

    # -- basic accessors ---------------------------------------------------
    @cached_property
    def nodes(self) -> tuple[str, ...]:
        return tuple(sorted(self._flags))

    @cached_property
    def index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    @property
    def edges(self) -> dict[Edge, int]:
        return dict(self._edges)

    @property
    def flags(self) -> dict[str, frozenset]:
        return dict(self._flags)

    @cached_property
    def labels(self) -> dict[str, str]:
        return {n: label_from_flags(f) for n, f in self._flags.items()}

    def label(self, node: str) -> str:
        return label_from_flags(self._flags[node])

    def __contains__(self, node) -> bool:
        return node in self._flags

    def __len__(self) -> int:
        return len(self._flags)

    def number_of_edges(self) -> int:
        return len(self._edges)

    def weight(self, src: str, dst: str) -> int:
        return self._edges.get((src, dst), 0)

    def total_weight(self) -> int:
        return sum(self._edges.values())

    def nodes_with_label(self, label: str) -> list[str]:
        return [n for n in self.nodes if self.labels[n] == label]

    # -- adjacency ---------------------------------------------------------
    @cached_property
    def _succ(self) -> dict[str, list[str]]:
        succ: dict[str, list[str]] = {n: [] for n in self.nodes}
        for src, dst in sorted(self._edges):
            succ[src].append(dst)
        return succ

    @cached_property
    def _pred(self) -> dict[str, list[str]]:
        pred: dict[str, list[str]] = {n: [] for n in self.nodes}
        for src, dst in sorted(self._edges):
            pred[dst].append(src)
        return pred

    @cached_property
    def _undirected(self) -> dict[str, list[str]]:
        return {n: sorted(set(self._succ[n]) | set(self._pred[n])) for n in self.nodes}

    def successors(self, node: str) -> list[str]:
        return self._succ[node]

    def predecessors(self, node: str) -> list[str]:
        return self._pred[node]

    def neighbors(self, node: str) -> list[str]:
        """Neighbors ignoring edge direction, sorted."""
        return self._undirected[node]

    def out_degree(self, node: str) -> int:
        return len(self._succ[node])

    def in_degree(self, node: str) -> int:
        return len(self._pred[node])

    def strength(self, u: str, v: str) -> int:
        """Emails exchanged between u and v in either direction."""
        return self._edges.get((u, v), 0) + self._edges.get((v, u), 0)

    def weakly_connected_components(self) -> list[set[str]]:
        seen: set[str] = set()
        comps = []
        for start in self.nodes:
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            seen.add(start)
            while stack:
                u = stack.pop()
                for v in self._undirected[u]:
                    if v not in seen:
                        seen.add(v)
                        comp.add(v)
                        stack.append(v)
            comps.append(comp)
        return comps

    # -- comparisons -------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, CommGraph):
            return NotImplemented
        return self._flags == other._flags and self._edges == other._edges

    def __hash__(self):
        return hash((frozenset(self._flags.items()), frozenset(self._edges.items())))

    def __repr__(self) -> str:
        return f"CommGraph(nodes={len(self)}, edges={self.number_of_edges()}, weight={self.total_weight()})"


def apply_delta(g: CommGraph, d: GraphDelta) -> CommGraph:
    """Return a new graph with the delta's weights summed and flags unioned."""
    if d.is_empty():
        return g
    flags = g.flags
    edges = g.edges
    for (src, dst), w in d.edge_increments.items():
        edges[(src, dst)] = edges.get((src, dst), 0) + w
        flags.setdefault(src, frozenset())
        flags.setdefault(dst, frozenset())
    for node, extra in d.new_labels.items():
        flags[node] = flags.get(node, frozenset()) | frozenset(extra)
    return CommGraph(flags, edges)


def remove_orphans(g: CommGraph) -> CommGraph:
    """Drop every node with no incoming and no outgoing edge."""
    keep = {n: f for n, f in g.flags.items() if g.in_degree(n) or g.out_degree(n)}
    if len(keep) == len(g):
        return g
    return CommGraph(keep, g.edges)


def prune_outliers(g: CommGraph, percentile: float | None) -> CommGraph:
    """Remove nodes whose in- or out-degree exceeds the given percentile.

    Disabled when ``percentile`` is None. Uses the nearest-rank percentile
    over the node population, so the result is exact and deterministic.
    """
    if percentile is None or len(g) == 0:
        return g
    if not 0 < percentile <= 100:
        raise ValueError("percentile must be in (0, 100]")

    def cutoff(values):
        ordered = sorted(values)
        rank = max(1, math.ceil(percentile / 100 * len(ordered)))
        return ordered[rank - 1]

    in_cut = cutoff(g.in_degree(n) for n in g.nodes)
    out_cut = cutoff(g.out_degree(n) for n in g.nodes)
    drop = {n for n in g.nodes if g.in_degree(n) > in_cut or g.out_degree(n) > out_cut}
    if not drop:
        return g
    flags = {n: f for n, f in g.flags.items() if n not in drop}
    edges = {e: w for e, w in g.edges.items() if e[0] not in drop and e[1] not in drop}
    return CommGraph(flags, edges)


# -- snapshot format -------------------------------------------------------
#
#   founderrank-graph 1
#   nodes <n>
#   <node_id>\t<label>\t<comma-separated flags or ->
#   edges <m>
#   <src>\t<dst>\t<weight>
#   end
#
# Nodes and edges are sorted, so equal graphs give identical bytes.


def dumps(g: CommGraph) -> str:
    lines = [f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}", f"nodes {len(g)}"]
    for n in g.nodes:
        flags = ",".join(sorted(g.flags[n])) or "-"
        lines.append(f"{n}\t{g.label(n)}\t{flags}")
    edges = sorted(g.edges.items())
    lines.append(f"edges {len(edges)}")
    lines.extend(f"{s}\t{d}\t{w}" for (s, d), w in edges)
    lines.append("end")
    return "\n".join(lines) + "\n"


def loads(text: str) -> CommGraph:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorruptSnapshot("empty snapshot")
    head = lines[0].split(" ")
    if len(head) != 2 or head[0] != SNAPSHOT_MAGIC:
        raise CorruptSnapshot("missing snapshot header")
    if head[1] != str(SNAPSHOT_VERSION):
        raise UnsupportedVersion(f"snapshot version {head[1]!r} (supported: {SNAPSHOT_VERSION})")
    try:
        pos = 1
        n_nodes = _section_count(lines[pos], "nodes")
        pos += 1
        flags = {}
        for line in lines[pos:pos + n_nodes]:
            node, label, raw_flags = line.split("\t")
            node_flags = frozenset() if raw_flags == "-" else frozenset(raw_flags.split(","))
            if label_from_flags(node_flags) != label:
                raise CorruptSnapshot(f"label {label!r} disagrees with flags for {node}")
            flags[node] = node_flags
        if len(flags) != n_nodes:
            raise CorruptSnapshot("node section truncated or has duplicates")
        pos += n_nodes
        n_edges = _section_count(lines[pos], "edges")
        pos += 1
        edges = {}
        for line in lines[pos:pos + n_edges]:
            src, dst, w = line.split("\t")
            if src not in flags or dst not in flags:
                raise CorruptSnapshot(f"edge {src}->{dst} references an unknown node")
            edges[(src, dst)] = int(w)
        if len(edges) != n_edges:
            raise CorruptSnapshot("edge section truncated or has duplicates")
        pos += n_edges
        if pos != len(lines) - 1 or lines[pos] != "end":
            raise CorruptSnapshot("missing end marker")
        return CommGraph(flags, edges)
    except CorruptSnapshot:
        raise
    except (IndexError, ValueError, InputError) as exc:
        raise CorruptSnapshot(f"unreadable snapshot: {exc}") from exc


def _section_count(line: str, name: str) -> int:
    parts = line.split(" ")
    if len(parts) != 2 or parts[0] != name:
        raise CorruptSnapshot(f"expected '{name} <count>' section header")
    return int(parts[1])


def save(g: CommGraph, path) -> None:
    from .fileio import atomic_write_text

    atomic_write_text(path, dumps(g))


def load(path) -> CommGraph:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read snapshot {path}: {exc}") from exc
    return loads(text)


# -- label files -----------------------------------------------------------
#
# CSV columns: node_id, role (founder, investor or person; several roles
# may be joined with ";"), employed_by_fund (true/false).

LABEL_FIELDS = ["node_id", "role", "employed_by_fund"]
_ROLE_FLAGS = {"founder": FLAG_FOUNDER, "investor": FLAG_INVESTOR, "person": None}


def read_labels(path) -> dict[str, frozenset]:
    from .fileio import parse_bool, read_csv, split_list

    out: dict[str, frozenset] = {}
    for n, row in enumerate(read_csv(path), 1):
        node = (row.get("node_id") or "").strip()
        _check_id(node)
        flags = set()
        for role in split_list((row.get("role") or "").lower()):
            if role not in _ROLE_FLAGS:
                raise InputError(f"{path} row {n}: unknown role {role!r}")
            if _ROLE_FLAGS[role]:
                flags.add(_ROLE_FLAGS[role])
        if parse_bool(row.get("employed_by_fund")):
            flags.add(FLAG_FUND)
        out[node] = out.get(node, frozenset()) | frozenset(flags)
    return out


def label_rows(flags: Mapping[str, Iterable[str]]) -> list[dict]:
    rows = []
    for node in sorted(flags):
        f = set(flags[node])
        roles = [r for r, flag in _ROLE_FLAGS.items() if flag and flag in f] or ["person"]
        rows.append({"node_id": node, "role": ";".join(roles),
                     "employed_by_fund": str(FLAG_FUND in f).lower()})
    return rows
