"""Fundraising-pattern analyses: raise duration and email volume versus commitment."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, InvalidTimeline, SingularDesign
from .fileio import atomic_write_text
from .ingest import parse_timestamp

DAY = 86400.0
WEEK = 7 * DAY
HISTOGRAM_BIN_DAYS = 14
CURVE_SAMPLES = 21


@dataclass(frozen=True)
class RaiseTimeline:
    """One founder's raise. Timestamps are POSIX seconds.

    ``weekly_email_share`` holds (week, share of the raise's emails) and
    ``committed_fraction_by_week`` holds (week, share of eventual investors
    committed by the end of that week). Weeks count from the first wishlist
    addition, starting at 0.
    """

    founder_id: str
    wishlist_first_add: float
    last_status_update: float
    weekly_email_share: tuple[tuple[int, float], ...] = ()
    committed_fraction_by_week: tuple[tuple[int, float], ...] = ()
    eventual_investors: int | None = None

    def validate(self) -> None:
        if self.weekly_email_share:
            total = math.fsum(s for _, s in self.weekly_email_share)
            if abs(total - 1.0) > 1e-9:
                raise InvalidTimeline(f"{self.founder_id}: email shares sum to {total}, not 1")
            if any(s < 0 for _, s in self.weekly_email_share):
                raise InvalidTimeline(f"{self.founder_id}: negative email share")
        last = -math.inf
        for _, frac in sorted(self.committed_fraction_by_week):
            if not 0.0 <= frac <= 1.0:
                raise InvalidTimeline(f"{self.founder_id}: committed fraction {frac} outside [0, 1]")
            if frac < last:
                raise InvalidTimeline(f"{self.founder_id}: committed fraction decreases")
            last = frac

    @classmethod
    def from_dict(cls, data: dict) -> "RaiseTimeline":
        try:
            t = cls(
                founder_id=str(data["founder_id"]),
                wishlist_first_add=parse_timestamp(data["wishlist_first_add"]),
                last_status_update=parse_timestamp(data["last_status_update"]),
                weekly_email_share=tuple((int(w), float(s)) for w, s in data.get("weekly_email_share", ())),
                committed_fraction_by_week=tuple(
                    (int(w), float(f)) for w, f in data.get("committed_fraction_by_week", ())),
                eventual_investors=data.get("eventual_investors"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidTimeline(f"bad timeline record: {exc}") from exc
        t.validate()
        return t

    def to_dict(self) -> dict:
        return {
            "founder_id": self.founder_id,
            "wishlist_first_add": self.wishlist_first_add,
            "last_status_update": self.last_status_update,
            "weekly_email_share": [list(p) for p in self.weekly_email_share],
            "committed_fraction_by_week": [list(p) for p in self.committed_fraction_by_week],
            "eventual_investors": self.eventual_investors,
        }


def fundraising_period(t: RaiseTimeline) -> int:
    """Whole days from the first wishlist addition to the last status update."""
    span = t.last_status_update - t.wishlist_first_add
    if span < 0:
        raise InvalidTimeline(f"{t.founder_id}: last status update precedes first wishlist addition")
    return int(span // DAY)


def week_index(start: float, ts: float) -> int:
    return int((ts - start) // WEEK)


def build_timeline(founder_id: str, first_add: float, last_update: float,
                   email_times: Sequence[float], commit_times: Sequence[float],
                   eventual_investors: int) -> RaiseTimeline:
    """Bucket raw email and commitment times into weekly shares.

    Weeks run from ``first_add``; the last, possibly partial, week is kept.
    """
    if last_update < first_add:
        raise InvalidTimeline(f"{founder_id}: last status update precedes first wishlist addition")
    weeks = week_index(first_add, last_update) + 1
    counts = np.zeros(weeks, dtype=np.int64)
    for ts in email_times:
        w = week_index(first_add, ts)
        if 0 <= w < weeks:
            counts[w] += 1
    total = int(counts.sum())
    shares = tuple((w, float(c) / total) for w, c in enumerate(counts)) if total else ()
    committed = ()
    if eventual_investors > 0:
        per_week = np.zeros(weeks, dtype=np.int64)
        for ts in commit_times:
            w = min(max(week_index(first_add, ts), 0), weeks - 1)
            per_week[w] += 1
        running = np.minimum(np.cumsum(per_week), eventual_investors)
        committed = tuple((w, float(c) / eventual_investors) for w, c in enumerate(running))
    return RaiseTimeline(founder_id, float(first_add), float(last_update), shares, committed,
                         eventual_investors)


def volume_points(timelines: Iterable[RaiseTimeline]) -> list[tuple[float, float]]:
    """(committed fraction, email share) pairs for each week of each usable timeline.

    Timelines without eventual investors carry no committed fraction and are
    left out.
    """
    points = []
    for t in timelines:
        if t.eventual_investors == 0 or not t.committed_fraction_by_week:
            continue
        share = dict(t.weekly_email_share)
        for week, frac in sorted(t.committed_fraction_by_week):
            if week in share:
                points.append((frac, share[week]))
    return points


@dataclass(frozen=True)
class CubicFit:
    coefficients: tuple[float, float, float, float]  # c0 + c1 x + c2 x^2 + c3 x^3
    residual_norm: float
    n_points: int

    def __call__(self, x):
        c0, c1, c2, c3 = self.coefficients
        return c0 + x * (c1 + x * (c2 + x * c3))


def vandermonde(xs) -> np.ndarray:
    return np.vander(np.asarray(xs, dtype=float), 4, increasing=True)


def volume_curve_fit(points: Sequence[tuple[float, float]]) -> CubicFit:
    """Unweighted least-squares cubic through (committed fraction, email share)."""
    if not points:
        raise SingularDesign("no points to fit")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if len(np.unique(xs)) < 4:
        raise SingularDesign(f"a cubic needs at least 4 distinct abscissae, got {len(np.unique(xs))}")
    a = vandermonde(xs)
    coef, *_ = np.linalg.lstsq(a, ys, rcond=None)
    if not np.all(np.isfinite(coef)):
        raise SingularDesign("fit produced non-finite coefficients")
    resid = ys - a @ coef
    return CubicFit(tuple(float(c) for c in coef), float(np.linalg.norm(resid)), len(points))


def read_timelines(path) -> list[RaiseTimeline]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    out = []
    for n, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InvalidTimeline(f"line {n}: {exc}") from exc
        out.append(RaiseTimeline.from_dict(record))
    return out


def write_timelines(path, timelines: Iterable[RaiseTimeline]) -> None:
    text = "".join(json.dumps(t.to_dict(), sort_keys=True) + "\n" for t in timelines)
    atomic_write_text(path, text)


def period_histogram(periods: Sequence[int], bin_days: int = HISTOGRAM_BIN_DAYS) -> list[tuple[int, int, int]]:
    """(bin start, bin end exclusive, count) rows covering every period."""
    if not periods:
        return []
    bins = max(periods) // bin_days + 1
    counts = [0] * bins
    for p in periods:
        counts[p // bin_days] += 1
    return [(i * bin_days, (i + 1) * bin_days, c) for i, c in enumerate(counts)]


def analysis_report(timelines: Sequence[RaiseTimeline]) -> str:
    periods = sorted(fundraising_period(t) for t in timelines)
    lines = [f"# timelines: {len(timelines)}"]
    if periods:
        lines.append(f"# mean period days: {np.mean(periods):.6g}")
        lines.append(f"# median period days: {np.median(periods):.6g}")
    lines += ["", "[period_histogram]", "bin_start_days\tbin_end_days\tcount"]
    lines += [f"{a}\t{b}\t{c}" for a, b, c in period_histogram(periods)]
    lines += ["", "[volume_fit]"]
    points = volume_points(timelines)
    try:
        fit = volume_curve_fit(points)
    except SingularDesign as exc:
        lines.append(f"# not fitted: {exc}")
    else:
        lines.append("c0\tc1\tc2\tc3\tresidual_norm\tpoints")
        lines.append("\t".join(repr(c) for c in fit.coefficients) + f"\t{fit.residual_norm!r}\t{fit.n_points}")
        lines += ["", "[volume_curve]", "committed_fraction\temail_share"]
        for x in np.linspace(0.0, 1.0, CURVE_SAMPLES):
            lines.append(f"{x:.2f}\t{fit(float(x))!r}")
    return "\n".join(lines) + "\n"
