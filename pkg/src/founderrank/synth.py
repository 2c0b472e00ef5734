"""Seeded synthetic worlds: communication graph, profiles, catalog, timelines.

Everything is drawn from one ``numpy.random.Generator`` seeded by the spec,
so equal specs give equal worlds. The ground truth records the planted
community of every node and the planted linear baseline over graph metrics.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from . import graph as graphmod
from .analytics import DAY, RaiseTimeline, build_timeline, write_timelines
from .centrality import METRIC_NAMES, compute_metrics
from .discovery.catalog import (FUNDING_STAGES, INDUSTRIES, Catalog, CompanyRecord, FirmRecord,
                                InvestorRecord, save_catalog)
from .discovery.engine import covering_industries
from .errors import InputError
from .fileio import atomic_write_text, read_json, write_csv, write_json
from .graph import FLAG_FOUNDER, FLAG_INVESTOR, CommGraph
from .ranking import PROFILE_FIELDS, FounderProfile, Ranking, save_ranking

EDGE_MODELS = ("pa", "er")
START_TIME = 1514764800.0  # 2018-01-01T00:00:00Z

CITIES = ("San Francisco", "New York", "Boston", "Los Angeles", "Seattle", "Austin", "Chicago",
          "London", "Berlin", "Toronto", "Palo Alto", "Menlo Park")
NON_US_CITIES = frozenset({"London", "Berlin", "Toronto"})
TOPICS = ("ai", "crypto", "fintech", "health", "climate", "devtools", "marketplaces", "consumer",
          "security", "edtech", "robotics", "bio", "saas", "gaming", "mobility")
FIRST_NAMES = ("Anna", "Ben", "Carla", "Dev", "Elena", "Farid", "Grace", "Hiro", "Ines", "Jamal",
               "Kira", "Luis", "Maya", "Noor", "Omar", "Priya", "Quinn", "Rosa", "Sam", "Tariq")
LAST_NAMES = ("Alvarez", "Brooks", "Chen", "Dubois", "Eze", "Fischer", "Gupta", "Hall", "Ito",
              "Jensen", "Kim", "Lopez", "Meyer", "Novak", "Okafor", "Park", "Quist", "Rossi",
              "Singh", "Tanaka")
FIRM_WORDS = ("Granite", "Harbor", "Lantern", "Meridian", "North", "Orbit", "Pioneer", "Quarry",
              "Redwood", "Summit", "Tidal", "Union", "Vector", "Willow", "Yardstick", "Zenith")
FIRM_SUFFIXES = ("Capital", "Ventures", "Partners", "Fund")


@dataclass(frozen=True)
class SynthSpec:
    founders: int = 50
    investors: int = 50
    others: int = 100
    edge_model: str = "pa"
    m: int = 2
    p: float = 0.05
    reciprocity: float = 0.5
    max_weight: int = 4
    seed: int = 0
    planted_communities: int = 1
    planted_baseline: dict = field(default_factory=lambda: {"closeness": 0.7, "pagerank": 0.3})
    noise: float = 0.0
    firms: int = 20
    companies: int = 60

    def __post_init__(self):
        for name in ("founders", "investors", "firms", "companies", "planted_communities", "m", "max_weight"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be positive")
        if self.others < 0:
            raise InputError("others must be non-negative")
        if self.edge_model not in EDGE_MODELS:
            raise InputError(f"edge_model must be one of {EDGE_MODELS}")
        for name in ("p", "reciprocity"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InputError(f"{name} must be a probability")
        if self.noise < 0:
            raise InputError("noise must be non-negative")
        unknown = set(self.planted_baseline) - set(METRIC_NAMES)
        if unknown:
            raise InputError(f"planted_baseline names unknown metrics {sorted(unknown)}")
        if min(self.community_sizes()) < 2:
            raise InputError("every planted community needs at least 2 nodes")

    @property
    def total_nodes(self) -> int:
        return self.founders + self.investors + self.others

    def community_sizes(self) -> list[int]:
        c = self.planted_communities
        return [len(range(i, self.total_nodes, c)) for i in range(c)]

    @classmethod
    def from_dict(cls, data: Mapping) -> "SynthSpec":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise InputError(f"unknown synth spec fields {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "SynthSpec":
        return cls.from_dict(read_json(path))


def _pa_edges_count(n: int, m: int) -> int:
    if n <= m + 1:
        return n * (n - 1) // 2
    return m * (m + 1) // 2 + (n - m - 1) * m


def expected_mean_degree(spec: SynthSpec) -> float:
    """Expected mean number of distinct neighbours per node."""
    sizes = spec.community_sizes()
    if spec.edge_model == "pa":
        total = sum(2 * _pa_edges_count(n, spec.m) for n in sizes)
    else:
        total = sum(n * (n - 1) * spec.p for n in sizes)
    return total / spec.total_nodes


def _pa_skeleton(members: list[str], m: int, rng) -> set[tuple[str, str]]:
    """Undirected preferential attachment seeded with a clique of m+1 nodes."""
    core = members[: m + 1]
    clique = [(a, b) for i, a in enumerate(core) for b in core[i + 1:]]
    edges = set(clique)
    # each node repeated once per incident edge; built from a list so the
    # draw order never depends on set iteration order
    pool = [x for e in clique for x in e]
    for node in members[m + 1:]:
        picks: list[str] = []
        while len(picks) < m:
            cand = pool[int(rng.integers(len(pool)))]
            if cand not in picks:
                picks.append(cand)
        for t in picks:
            edges.add((t, node))
            pool += [t, node]
    return edges


def _er_skeleton(members: list[str], p: float, rng) -> set[tuple[str, str]]:
    n = len(members)
    if n < 2:
        return set()
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    return {(members[i], members[j]) for i, j in zip(iu[keep], ju[keep])}


def mean_degree(g: CommGraph) -> float:
    return sum(len(g.neighbors(n)) for n in g.nodes) / len(g)


@dataclass
class SynthWorld:
    spec: SynthSpec
    graph: CommGraph
    profiles: list[FounderProfile]
    catalog: Catalog
    timelines: list[RaiseTimeline]
    ground_truth: dict
    events: list[dict]
    mailbox_owner: str


def _addresses(spec: SynthSpec) -> tuple[list[str], list[str], list[str]]:
    founders = [f"founder{i:04d}@startups.example" for i in range(spec.founders)]
    investors = [f"investor{i:04d}@vc.example" for i in range(spec.investors)]
    others = [f"person{i:04d}@mail.example" for i in range(spec.others)]
    return founders, investors, others


def _build_graph(spec: SynthSpec, rng) -> tuple[CommGraph, dict[str, int]]:
    founders, investors, others = _addresses(spec)
    nodes = founders + investors + others
    order = rng.permutation(len(nodes))
    shuffled = [nodes[i] for i in order]
    c = spec.planted_communities
    community = {node: pos % c for pos, node in enumerate(shuffled)}
    edges: dict[tuple[str, str], int] = {}
    for cid in range(c):
        members = shuffled[cid::c]
        if spec.edge_model == "pa":
            skeleton = _pa_skeleton(members, spec.m, rng)
        else:
            skeleton = _er_skeleton(members, spec.p, rng)
        for a, b in sorted(skeleton):
            if rng.random() < 0.5:
                a, b = b, a
            edges[(a, b)] = int(rng.integers(1, spec.max_weight + 1))
            if rng.random() < spec.reciprocity:
                edges[(b, a)] = int(rng.integers(1, spec.max_weight + 1))
    flags = {n: {FLAG_FOUNDER} for n in founders}
    flags.update({n: {FLAG_INVESTOR} for n in investors})
    flags.update({n: set() for n in others})
    return CommGraph(flags, edges), community


def _events(g: CommGraph, rng) -> list[dict]:
    """One plain person-to-person message per unit of edge weight."""
    messages = []
    for (src, dst), w in sorted(g.edges.items()):
        for _ in range(w):
            messages.append((src, dst))
    order = rng.permutation(len(messages))
    out = []
    for k, idx in enumerate(order):
        src, dst = messages[idx]
        out.append({
            "message_id": f"<m{k:07d}@synth.example>",
            "thread_id": f"t{k:07d}",
            "timestamp": START_TIME + 60.0 * k,
            "from_addr": src,
            "to": [dst],
            "body_text": "Thanks for the note, talk soon.",
        })
    return out


def _profiles(founders: list[str], planted: dict[str, float], rng) -> list[FounderProfile]:
    out = []
    for f in founders:
        y = planted[f]
        exits = tuple(int(x) for x in rng.poisson(0.3, size=6))
        out.append(FounderProfile(
            founder_id=f,
            current_round_raised=float(round(max(0.0, y + 0.1 * rng.standard_normal()) * 2.0e6, 2)),
            previous_rounds_raised=float(round(rng.exponential(5.0e5), 2)),
            industry_avg_round=2.0e6,
            interested_investor_count=int(rng.poisson(1.0 + 10.0 * y)),
            waitlist_responded_count=int(rng.poisson(1.0 + 5.0 * y)),
            avg_incoming_sentiment=float(np.clip(2.0 * y - 1.0 + 0.2 * rng.standard_normal(), -1.0, 1.0)),
            exits=exits,
        ))
    return out


def _catalog(spec: SynthSpec, investors: list[str], rng) -> Catalog:
    companies = []
    for i in range(spec.companies):
        k = int(rng.integers(1, 4))
        inds = frozenset(INDUSTRIES[j] for j in rng.choice(len(INDUSTRIES), size=k, replace=False))
        companies.append(CompanyRecord(f"c{i:04d}", f"Startup {i:04d}", inds,
                                       CITIES[int(rng.integers(len(CITIES)))]))
    by_id = {c.company_id: c for c in companies}

    firms = []
    members: dict[str, list[InvestorRecord]] = {}
    for i, addr in enumerate(investors):
        firm_id = f"firm{i % spec.firms:04d}"
        topics = frozenset(TOPICS[j] for j in rng.choice(len(TOPICS), size=int(rng.integers(0, 4)),
                                                         replace=False))
        members.setdefault(firm_id, []).append(InvestorRecord(
            investor_id=f"inv{i:04d}",
            first_name=FIRST_NAMES[int(rng.integers(len(FIRST_NAMES)))],
            last_name=LAST_NAMES[int(rng.integers(len(LAST_NAMES)))],
            firm_id=firm_id,
            featured=bool(rng.random() < 0.2),
            verified=bool(rng.random() < 0.3),
            topics=topics,
            email=addr,
        ))
    invested_by: dict[str, list[str]] = {}
    for i in range(spec.firms):
        firm_id = f"firm{i:04d}"
        word = FIRM_WORDS[i % len(FIRM_WORDS)]
        suffix = FIRM_SUFFIXES[(i // len(FIRM_WORDS)) % len(FIRM_SUFFIXES)]
        name = f"{word} {suffix}" + (f" {i // (len(FIRM_WORDS) * len(FIRM_SUFFIXES)) + 1}"
                                     if i >= len(FIRM_WORDS) * len(FIRM_SUFFIXES) else "")
        size = int(rng.integers(1, min(10, spec.companies) + 1))
        picks = sorted(f"c{j:04d}" for j in rng.choice(spec.companies, size=size, replace=False))
        for cid in picks:
            invested_by.setdefault(cid, []).append(firm_id)
        hq = CITIES[int(rng.integers(len(CITIES)))]
        offices = tuple(sorted({CITIES[int(j)] for j in rng.integers(len(CITIES), size=int(rng.integers(0, 3)))}
                               - {hq}))
        stage_lo = int(rng.integers(len(FUNDING_STAGES)))
        stages = frozenset(FUNDING_STAGES[stage_lo:stage_lo + int(rng.integers(1, 4))])
        team = tuple(sorted(members.get(firm_id, []), key=lambda r: r.investor_id))
        firms.append(FirmRecord(
            firm_id=firm_id,
            name=name,
            hq_city=hq,
            office_cities=offices,
            stages=stages,
            industries=frozenset(covering_industries([by_id[c] for c in picks])),
            investments=tuple(picks),
            investments_last_year=int(rng.integers(0, 40)),
            featured_investor_count=sum(r.featured for r in team),
            verified_investor_count=sum(r.verified for r in team),
            conversation_count=int(rng.poisson(3.0)),
            us_only_eligible=hq not in NON_US_CITIES,
            investors=team,
        ))
    companies = [CompanyRecord(c.company_id, c.name, c.industries, c.city,
                               tuple(sorted(invested_by.get(c.company_id, ()))))
                 for c in companies]
    return Catalog.build(firms, (), companies)


def _timelines(founders: list[str], rng) -> list[RaiseTimeline]:
    out = []
    for f in founders:
        first = START_TIME + float(rng.integers(0, 60)) * DAY + float(rng.random()) * DAY
        days = float(rng.integers(14, 200))
        last = first + days * DAY + float(rng.random()) * DAY
        eventual = int(rng.integers(0, 8))
        commits = sorted(first + days * DAY * float(rng.beta(4.0, 2.0)) for _ in range(eventual))
        n_emails = int(rng.integers(10, 120))
        emails = [first + (last - first) * float(rng.beta(2.0, 2.0)) for _ in range(n_emails)]
        out.append(build_timeline(f, first, last, emails, commits, eventual))
    return out


def generate(spec: SynthSpec) -> SynthWorld:
    rng = np.random.default_rng(spec.seed)
    g, community = _build_graph(spec, rng)
    founders, investors, _ = _addresses(spec)

    metrics = compute_metrics(g)
    planted = {}
    for f in founders:
        m = metrics.get(f)
        y = math.fsum(w * getattr(m, name) for name, w in sorted(spec.planted_baseline.items()))
        planted[f] = y
    if spec.noise > 0:
        draws = rng.standard_normal(len(founders))
        planted = {f: planted[f] + spec.noise * float(e) for f, e in zip(founders, draws)}

    events = _events(g, rng)
    profiles = _profiles(founders, {f: float(np.clip(planted[f], 0.0, 1.0)) for f in founders}, rng)
    catalog = _catalog(spec, investors, rng)
    timelines = _timelines(founders, rng)
    truth = {
        "seed": spec.seed,
        "communities": dict(sorted(community.items())),
        "planted_baseline": dict(sorted(spec.planted_baseline.items())),
        "planted_intercept": 0.0,
        "noise": spec.noise,
        "planted_scores": dict(sorted(planted.items())),
        "expected_mean_degree": expected_mean_degree(spec),
    }
    return SynthWorld(spec, g, profiles, catalog, timelines, truth, events, founders[0])


def write_world(world: SynthWorld, out_dir) -> dict[str, str]:
    """Write every artifact of a world under ``out_dir``; returns name -> path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "graph": out / "graph.snap",
        "events": out / "events.jsonl",
        "labels": out / "labels.csv",
        "profiles": out / "profiles.csv",
        "catalog": out / "catalog",
        "timelines": out / "timelines.jsonl",
        "ground_truth": out / "ground_truth.json",
        "planted_ranking": out / "planted_ranking.csv",
        "spec": out / "spec.json",
    }
    graphmod.save(world.graph, paths["graph"])
    atomic_write_text(paths["events"], "".join(json.dumps(e, sort_keys=True) + "\n" for e in world.events))
    write_csv(paths["labels"], graphmod.LABEL_FIELDS, graphmod.label_rows(world.graph.flags))
    write_csv(paths["profiles"], list(PROFILE_FIELDS), [p.to_row() for p in world.profiles])
    save_catalog(world.catalog, paths["catalog"])
    write_timelines(paths["timelines"], world.timelines)
    truth = dict(world.ground_truth, mailbox_owner=world.mailbox_owner)
    write_json(paths["ground_truth"], truth)
    save_ranking(Ranking.from_scores(world.ground_truth["planted_scores"], "planted"), paths["planted_ranking"])
    write_json(paths["spec"], asdict(world.spec))
    return {k: str(v) for k, v in paths.items()}
