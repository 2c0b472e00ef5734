"""Founder rankings: hand-crafted baselines and graph-metric models.

The baselines sort founders once per profile metric, then add up each
founder's weighted sort positions; a lower total is a better founder.
Sort positions use competition ranking (the number of founders strictly
better), so founders tied on a metric share a position.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .centrality import METRIC_NAMES, MetricTable
from .errors import IdentityConflict, InputError, SingularDesign, UnknownMetric
from .fileio import atomic_write_text, read_csv
from .graph import FLAG_FOUNDER, FLAG_INVESTOR, CommGraph

log = logging.getLogger(__name__)

EXIT_FIELDS = ("job_ipo", "job_acq", "exec_ipo", "exec_acq", "adv_ipo", "adv_acq")

PROFILE_FIELDS = (
    "founder_id", "current_round_raised", "previous_rounds_raised", "industry_avg_round",
    "interested_investor_count", "waitlist_responded_count", "avg_incoming_sentiment",
    *EXIT_FIELDS,
)


@dataclass(frozen=True)
class FounderProfile:
    founder_id: str
    current_round_raised: float = 0.0
    previous_rounds_raised: float = 0.0
    industry_avg_round: float = 1.0
    interested_investor_count: int = 0
    waitlist_responded_count: int = 0
    avg_incoming_sentiment: float = 0.0
    exits: tuple[int, int, int, int, int, int] = (0, 0, 0, 0, 0, 0)

    def __post_init__(self):
        if not self.founder_id:
            raise InputError("founder_id must be non-empty")
        if not self.industry_avg_round > 0:
            raise InputError(f"{self.founder_id}: industry_avg_round must be positive")
        if self.current_round_raised < 0 or self.previous_rounds_raised < 0:
            raise InputError(f"{self.founder_id}: amounts raised must be non-negative")
        if self.interested_investor_count < 0 or self.waitlist_responded_count < 0:
            raise InputError(f"{self.founder_id}: counts must be non-negative")
        if not -1.0 <= self.avg_incoming_sentiment <= 1.0:
            raise InputError(f"{self.founder_id}: sentiment outside [-1, 1]")
        if len(self.exits) != 6 or any(e < 0 for e in self.exits):
            raise InputError(f"{self.founder_id}: exits must be six non-negative counts")

    @classmethod
    def from_row(cls, row: Mapping) -> "FounderProfile":
        def num(key, cast=float):
            value = row.get(key)
            if value in (None, ""):
                return cast(0)
            try:
                return cast(float(value)) if cast is int else cast(value)
            except ValueError as exc:
                raise InputError(f"{row.get('founder_id')}: bad {key} {value!r}") from exc

        return cls(
            founder_id=str(row.get("founder_id") or "").strip(),
            current_round_raised=num("current_round_raised"),
            previous_rounds_raised=num("previous_rounds_raised"),
            industry_avg_round=num("industry_avg_round") if row.get("industry_avg_round") not in (None, "") else 1.0,
            interested_investor_count=num("interested_investor_count", int),
            waitlist_responded_count=num("waitlist_responded_count", int),
            avg_incoming_sentiment=num("avg_incoming_sentiment"),
            exits=tuple(num(k, int) for k in EXIT_FIELDS),
        )

    def to_row(self) -> dict:
        row = {
            "founder_id": self.founder_id,
            "current_round_raised": repr(self.current_round_raised),
            "previous_rounds_raised": repr(self.previous_rounds_raised),
            "industry_avg_round": repr(self.industry_avg_round),
            "interested_investor_count": self.interested_investor_count,
            "waitlist_responded_count": self.waitlist_responded_count,
            "avg_incoming_sentiment": repr(self.avg_incoming_sentiment),
        }
        row.update(zip(EXIT_FIELDS, self.exits))
        return row


def load_profiles(path) -> list[FounderProfile]:
    profiles = [FounderProfile.from_row(r) for r in read_csv(path)]
    ids = [p.founder_id for p in profiles]
    if len(set(ids)) != len(ids):
        raise InputError(f"duplicate founder_id in {path}")
    return profiles


def scaled_funding(p: FounderProfile) -> float:
    """Money raised so far, in multiples of the industry's average round."""
    return (p.current_round_raised + p.previous_rounds_raised) / p.industry_avg_round


def affiliated_exits(p: FounderProfile) -> int:
    return sum(p.exits)


PROFILE_METRICS = {
    "aggregate_funding": scaled_funding,
    "interested": lambda p: p.interested_investor_count,
    "waitlist_responded": lambda p: p.waitlist_responded_count,
    "sentiment": lambda p: p.avg_incoming_sentiment,
    "affiliated_exits": affiliated_exits,
}

EMAIL_BASELINE_WEIGHTS = (
    ("aggregate_funding", 4.0),
    ("interested", 3.0),
    ("waitlist_responded", 2.0),
    ("sentiment", 1.0),
)
FRI_BASELINE_WEIGHTS = (
    ("affiliated_exits", 4.0),
    ("aggregate_funding", 1.0),
)


@dataclass(frozen=True)
class Ranking:
    """A strict order over founders (best first) plus a [0, 1] score each."""

    order: tuple[str, ...]
    score: dict[str, float]
    raw_scores: dict[str, float] | None = None
    method: str = ""

    def __post_init__(self):
        if set(self.order) != set(self.score) or len(set(self.order)) != len(self.order):
            raise ValueError("ranking order and score map must cover the same founders once each")

    def __len__(self) -> int:
        return len(self.order)

    def position(self, founder: str) -> int:
        return self.positions[founder]

    @property
    def positions(self) -> dict[str, int]:
        return {f: i for i, f in enumerate(self.order)}

    @classmethod
    def from_scores(cls, scores: Mapping[str, float], method: str = "") -> "Ranking":
        """Sort by score descending; ties go to the lexicographically smaller id."""
        order = tuple(sorted(scores, key=lambda f: (-scores[f], f)))
        return cls(order, {f: float(scores[f]) for f in order}, None, method)


def position_scores(order: Sequence[str]) -> dict[str, float]:
    """Scale positions into [0, 1]: best 1.0, worst 0.0."""
    n = len(order)
    if n == 1:
        return {order[0]: 1.0}
    return {f: 1.0 - r / (n - 1) for r, f in enumerate(order)}


def sort_index(values: Mapping[str, float]) -> dict[str, int]:
    """Position of each founder when sorted best-first (larger is better).

    Tied values share the position of the first of them.
    """
    ordered = sorted(values.values(), reverse=True)
    first = {}
    for i, v in enumerate(ordered):
        first.setdefault(v, i)
    return {f: first[v] for f, v in values.items()}


def _check_weights(weights: Iterable[tuple[str, float]]) -> list[tuple[str, float]]:
    weights = [(str(m), float(w)) for m, w in weights]
    if not weights:
        raise ValueError("at least one (metric, weight) pair is required")
    for m, w in weights:
        if m not in PROFILE_METRICS:
            raise UnknownMetric(f"unknown baseline metric {m!r}; known: {sorted(PROFILE_METRICS)}")
        if not w > 0:
            raise ValueError(f"weight for {m} must be positive")
    return weights


def baseline_rank(profiles: Sequence[FounderProfile], weights, method: str = "baseline") -> Ranking:
    """Weighted sum of per-metric sort positions; ascending total wins."""
    weights = _check_weights(weights)
    if not profiles:
        raise ValueError("no founders to rank")
    ids = [p.founder_id for p in profiles]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate founder ids")
    totals = dict.fromkeys(ids, 0.0)
    for metric, w in weights:
        fn = PROFILE_METRICS[metric]
        idx = sort_index({p.founder_id: fn(p) for p in profiles})
        for f, s in idx.items():
            totals[f] += s * w
    order = _order_totals(totals, weights)
    return Ranking(order, position_scores(order), totals, method)


TIE_TOLERANCE = 1e-9


def _order_totals(totals: dict[str, float], weights) -> tuple[str, ...]:
    """Ascending totals; totals within rounding distance tie and fall back to founder id.

    Scaling the weights changes floating-point rounding, so exact equality would
    let two mathematically equal totals split differently under different scales.
    """
    scale = TIE_TOLERANCE * max(1.0, len(totals)) * sum(abs(w) for _, w in weights)
    by_total = sorted(totals, key=lambda f: (totals[f], f))
    order: list[str] = []
    group: list[str] = []
    for f in by_total:
        if group and totals[f] - totals[group[-1]] > scale:
            order += sorted(group)
            group = []
        group.append(f)
    return tuple(order + sorted(group))


def email_baseline(profiles: Sequence[FounderProfile]) -> Ranking:
    return baseline_rank(profiles, EMAIL_BASELINE_WEIGHTS, "baseline")


def fri_baseline(profiles: Sequence[FounderProfile]) -> Ranking:
    return baseline_rank(profiles, FRI_BASELINE_WEIGHTS, "fri-baseline")


def random_rank(founders: Iterable[str], seed: int) -> Ranking:
    """Uniform [0, 1) scores from a seeded generator, drawn in founder-id order."""
    ids = sorted(set(founders))
    draws = np.random.default_rng(seed).random(len(ids))
    return Ranking.from_scores(dict(zip(ids, draws.tolist())), "random")


def nfr_score(m) -> float:
    """Plain mean of the three scaled metrics."""
    return (m.pagerank + m.betweenness + m.closeness) / 3.0


def nfr_rank(founders: Iterable[str], metrics: MetricTable) -> Ranking:
    founders = sorted(set(founders))
    absent = [f for f in founders if f not in metrics.scaled]
    if absent:
        log.warning("%d founders have no graph node and score 0, e.g. %s", len(absent), absent[0])
    return Ranking.from_scores({f: nfr_score(metrics.get(f)) for f in founders}, "nfr")


@dataclass(frozen=True)
class RegressionFit:
    names: tuple[str, ...]
    coefficients: tuple[float, ...]
    intercept: float
    r_squared: float
    residuals: np.ndarray = field(repr=False, compare=False, default=None)

    def predict(self, features) -> np.ndarray:
        x = np.asarray(features, dtype=float)
        return self.intercept + x @ np.asarray(self.coefficients)

    def to_dict(self) -> dict:
        return {
            "features": list(self.names),
            "coefficients": dict(zip(self.names, self.coefficients)),
            "intercept": self.intercept,
            "r_squared": self.r_squared,
        }


def _dependent_columns(design: np.ndarray) -> list[int]:
    """Indices of columns that add nothing to the span of the earlier ones."""
    bad = []
    kept: list[int] = []
    for j in range(design.shape[1]):
        trial = design[:, kept + [j]]
        if np.linalg.matrix_rank(trial) < len(kept) + 1:
            bad.append(j)
        else:
            kept.append(j)
    return bad


def wfr_fit(features, target, names: Sequence[str] | None = None) -> RegressionFit:
    """Ordinary least squares with an intercept.

    Raises SingularDesign naming any feature column that is constant or a
    linear combination of the others.
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(target, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, k = x.shape
    names = tuple(names) if names is not None else tuple(f"x{i}" for i in range(k))
    if len(names) != k:
        raise ValueError("one name per feature column is required")
    if y.shape != (n,):
        raise ValueError("target length must match the number of rows")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("features and target must be finite")
    if n < k + 1:
        raise SingularDesign(f"{n} observations cannot determine {k + 1} parameters", names)
    design = np.column_stack([np.ones(n), x])
    if np.linalg.matrix_rank(design) < k + 1:
        cols = [names[j - 1] for j in _dependent_columns(design) if j > 0]
        raise SingularDesign(f"collinear feature columns: {', '.join(cols)}", cols)
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ beta
    ss_res = float(residuals @ residuals)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return RegressionFit(names, tuple(float(b) for b in beta[1:]), float(beta[0]), r2, residuals)


def feature_matrix(founders: Sequence[str], metrics: MetricTable,
                   names: Sequence[str] = METRIC_NAMES) -> np.ndarray:
    for name in names:
        if name not in METRIC_NAMES:
            raise UnknownMetric(f"unknown graph metric {name!r}")
    return np.array([[getattr(metrics.get(f), name) for name in names] for f in founders], dtype=float)


def wfr_rank(baseline: Ranking, metrics: MetricTable,
             names: Sequence[str] = METRIC_NAMES) -> tuple[Ranking, RegressionFit]:
    """Fit metric weights to the baseline's [0, 1] scores and rank by the fit.

    Fitted scores are clamped into [0, 1].
    """
    founders = sorted(baseline.order)
    x = feature_matrix(founders, metrics, names)
    y = [baseline.score[f] for f in founders]
    fit = wfr_fit(x, y, names)
    predicted = np.clip(fit.predict(x), 0.0, 1.0)
    return Ranking.from_scores(dict(zip(founders, predicted.tolist())), "wfr"), fit


# -- funding graph ---------------------------------------------------------

def build_funding_graph(investments: Iterable[tuple[str, str]],
                        cofoundings: Iterable[tuple[str, str]] = (),
                        coinvestings: Iterable[tuple[str, str]] | None = None) -> CommGraph:
    """Public funding graph: each investment and co-founding adds edges both ways."""
    edges: dict[tuple[str, str], int] = {}
    flags: dict[str, set] = {}

    def link(a, b):
        if not a or not b:
            raise InputError("funding records need non-empty ids")
        if a == b:
            log.warning("ignoring self-relationship for %s", a)
            return
        edges[(a, b)] = edges.get((a, b), 0) + 1
        edges[(b, a)] = edges.get((b, a), 0) + 1

    for founder, investor in investments:
        link(founder, investor)
        flags.setdefault(founder, set()).add(FLAG_FOUNDER)
        flags.setdefault(investor, set()).add(FLAG_INVESTOR)
    for a, b in cofoundings:
        link(a, b)
        flags.setdefault(a, set()).add(FLAG_FOUNDER)
        flags.setdefault(b, set()).add(FLAG_FOUNDER)
    for a, b in coinvestings or ():
        link(a, b)
        flags.setdefault(a, set()).add(FLAG_INVESTOR)
        flags.setdefault(b, set()).add(FLAG_INVESTOR)
    return CommGraph(flags, edges)


def overlay(email_g: CommGraph, funding_g: CommGraph, identity_map: Mapping[str, str]) -> CommGraph:
    """Merge the funding graph into the email graph.

    Funding nodes listed in ``identity_map`` are folded into the mapped
    email node; the rest join as they are. Weights add, role flags union.
    """
    targets = list(identity_map.values())
    if len(set(targets)) != len(targets):
        dupes = sorted({t for t in targets if targets.count(t) > 1})
        raise IdentityConflict(f"several person ids map to {dupes[0]}")
    unmapped = set(funding_g.nodes) - set(identity_map)
    clash = sorted(t for p, t in identity_map.items() if p in funding_g and t in unmapped)
    if clash:
        raise IdentityConflict(f"mapped address {clash[0]} is also an unmapped funding node")

    def rename(n):
        return identity_map.get(n, n)

    flags = {n: set(f) for n, f in email_g.flags.items()}
    for n, f in funding_g.flags.items():
        flags.setdefault(rename(n), set()).update(f)
    edges = email_g.edges
    for (s, d), w in funding_g.edges.items():
        key = (rename(s), rename(d))
        edges[key] = edges.get(key, 0) + w
    return CommGraph(flags, edges)


# -- ranking files ---------------------------------------------------------
#
# CSV with columns rank (0-based), founder_id, score, raw_score (may be blank),
# plus a leading "# method: <name>" comment line.


def ranking_text(r: Ranking) -> str:
    lines = [f"# method: {r.method or 'unknown'}", "rank,founder_id,score,raw_score"]
    for i, f in enumerate(r.order):
        raw = "" if r.raw_scores is None else repr(float(r.raw_scores[f]))
        lines.append(f"{i},{f},{r.score[f]!r},{raw}")
    return "\n".join(lines) + "\n"


def save_ranking(r: Ranking, path) -> None:
    atomic_write_text(path, ranking_text(r))


def load_ranking(path) -> Ranking:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    except OSError as exc:
        raise InputError(f"cannot read ranking {path}: {exc}") from exc
    method = ""
    if lines and lines[0].startswith("#"):
        method = lines.pop(0).partition(":")[2].strip()
    if not lines or lines[0].split(",")[:3] != ["rank", "founder_id", "score"]:
        raise InputError(f"{path}: missing ranking header")
    rows = []
    try:
        for ln in lines[1:]:
            rank, founder, score, *rest = ln.split(",")
            raw = rest[0] if rest and rest[0] != "" else None
            rows.append((int(rank), founder, float(score), None if raw is None else float(raw)))
    except ValueError as exc:
        raise InputError(f"{path}: bad ranking row: {exc}") from exc
    rows.sort()
    if [r[0] for r in rows] != list(range(len(rows))):
        raise InputError(f"{path}: ranks must be 0..N-1")
    order = tuple(r[1] for r in rows)
    raw_scores = None if any(r[3] is None for r in rows) else {r[1]: r[3] for r in rows}
    try:
        return Ranking(order, {r[1]: r[2] for r in rows}, raw_scores, method)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from exc
