"""Filter, search and sort over the investor catalog, plus derived attributes."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..errors import InvalidQuery, UnknownCompanyId, UnknownTopicId
from .catalog import STAGE_RANK, Catalog, CompanyRecord, FirmRecord, InvestorRecord, check_industries, check_stages

MIN_SEARCH_LENGTH = 2
HUB_CITY_THRESHOLD = 50
STAGE_SHARE = 0.5
TOPIC_SHARE = 0.05

SORT_COLUMNS = ("name", "hq", "pace", "stage")


@dataclass(frozen=True)
class FilterQuery:
    stages: frozenset = frozenset()
    industries: frozenset = frozenset()
    industries_and: bool = False
    cities: frozenset = frozenset()
    cities_invested_in: bool = False
    related_companies: frozenset = frozenset()
    related_similar: bool = False
    topics: frozenset = frozenset()
    us_only: bool = False
    search: str | None = None
    sort_by: str | None = None
    descending: bool = False

    @classmethod
    def from_dict(cls, data: Mapping) -> "FilterQuery":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidQuery(f"unknown query fields {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("stages", "industries", "cities", "related_companies", "topics"):
            if key in kwargs:
                value = kwargs[key]
                if isinstance(value, str):
                    value = [value]
                kwargs[key] = frozenset(value or ())
        q = cls(**kwargs)
        q.validate()
        return q

    def validate(self) -> None:
        try:
            check_stages(self.stages, "query")
            check_industries(self.industries, "query")
        except Exception as exc:
            raise InvalidQuery(str(exc)) from exc
        if self.search is not None and len(self.search.strip()) < MIN_SEARCH_LENGTH:
            raise InvalidQuery(f"search must be at least {MIN_SEARCH_LENGTH} characters")
        if self.sort_by is not None and self.sort_by not in SORT_COLUMNS:
            raise InvalidQuery(f"sort_by must be one of {SORT_COLUMNS}")

    def to_dict(self) -> dict:
        out = {}
        for key in self.__dataclass_fields__:
            value = getattr(self, key)
            out[key] = sorted(value) if isinstance(value, frozenset) else value
        return out


@dataclass(frozen=True)
class FounderContext:
    """Profile data used only to personalize ordering, never to filter."""

    industries: frozenset = frozenset()
    cities: frozenset = frozenset()

    @classmethod
    def from_dict(cls, data: Mapping | None) -> "FounderContext":
        data = data or {}
        cities = data.get("cities") or ([data["city"]] if data.get("city") else [])
        return cls(frozenset(data.get("industries") or ()), frozenset(cities))


# -- derived attributes ----------------------------------------------------

def covering_industries(companies: Sequence[CompanyRecord]) -> list[str]:
    """Pick industries by descending overall frequency until every company is covered.

    Ties in frequency go to the alphabetically first industry.
    """
    counts = Counter(i for c in companies for i in c.industries)
    options = sorted(counts, key=lambda i: (-counts[i], i))
    selected: list[str] = []
    chosen: set[str] = set()
    uncovered = [c for c in companies]
    for industry in options:
        if not uncovered:
            break
        selected.append(industry)
        chosen.add(industry)
        uncovered = [c for c in uncovered if not (c.industries & chosen)]
    return selected


def infer_stages(round_stages: Sequence[str]) -> frozenset:
    """Stages that account for at least half of a firm's past rounds."""
    if not round_stages:
        return frozenset()
    counts = Counter(round_stages)
    total = len(round_stages)
    return frozenset(s for s, c in counts.items() if c / total >= STAGE_SHARE)


def associate_topics(mention_fractions: Mapping[str, float]) -> frozenset:
    return frozenset(t for t, share in mention_fractions.items() if share >= TOPIC_SHARE)


def hub_cities(firms: Iterable[FirmRecord], threshold: int = HUB_CITY_THRESHOLD) -> frozenset:
    """Cities hosting at least ``threshold`` firm offices (each firm counted once per city)."""
    counts = Counter(city for f in firms for city in f.cities)
    return frozenset(city for city, c in counts.items() if c >= threshold)


def infer_point_partner(mention_counts: Mapping[str, int]) -> str | None:
    """The partner mentioned strictly more often than every other one."""
    if not mention_counts:
        return None
    top = max(mention_counts.values())
    if top <= 0:
        return None
    leaders = [p for p, c in mention_counts.items() if c == top]
    return leaders[0] if len(leaders) == 1 else None


# -- search ----------------------------------------------------------------

def extract_name_components(search: str) -> tuple[str, str]:
    """One token searches both name parts; otherwise first and last tokens."""
    tokens = search.lower().split()
    if not tokens:
        return "", ""
    if len(tokens) == 1:
        return tokens[0], tokens[0]
    return tokens[0], tokens[-1]


def investor_name_matches(inv: InvestorRecord, search: str) -> bool:
    first, last = extract_name_components(search)
    return (bool(first) and first in inv.first_name.lower()) or (bool(last) and last in inv.last_name.lower())


def search_firms(firms: Iterable[FirmRecord], search: str) -> list[FirmRecord]:
    needle = search.strip().lower()
    return [f for f in firms
            if needle in f.name.lower() or any(investor_name_matches(i, needle) for i in f.investors)]


# -- filters ---------------------------------------------------------------

def _check_references(catalog: Catalog, q: FilterQuery) -> None:
    missing = sorted(c for c in q.related_companies if c not in catalog.companies)
    if missing:
        raise UnknownCompanyId(f"unknown company ids {missing}")
    missing = sorted(t for t in q.topics if t not in catalog.topics)
    if missing:
        raise UnknownTopicId(f"unknown topic ids {missing}")


def _invested_cities(catalog: Catalog, firm: FirmRecord) -> set[str]:
    return {catalog.companies[c].city for c in firm.investments if c in catalog.companies}


def _similar_companies(catalog: Catalog, related: frozenset) -> set[str]:
    wanted = set()
    for cid in related:
        wanted |= catalog.companies[cid].industries
    return {cid for cid, c in catalog.companies.items() if c.industries & wanted}


def apply_filters(catalog: Catalog, firms: Iterable[FirmRecord], q: FilterQuery) -> list[FirmRecord]:
    """Narrow ``firms`` by every filter present in the query (AND across filters)."""
    result = list(firms)
    if q.stages:
        result = [f for f in result if f.stages & q.stages]
    if q.industries:
        if q.industries_and:
            result = [f for f in result if q.industries <= f.industries]
        else:
            result = [f for f in result if f.industries & q.industries]
    if q.cities:
        if q.cities_invested_in:
            result = [f for f in result if _invested_cities(catalog, f) & q.cities]
        else:
            result = [f for f in result if f.cities & q.cities]
    if q.related_companies:
        targets = _similar_companies(catalog, q.related_companies) if q.related_similar else q.related_companies
        result = [f for f in result if set(f.investments) & targets]
    if q.topics:
        result = [f for f in result if any(i.topics & q.topics for i in f.investors)]
    if q.us_only:
        result = [f for f in result if f.us_only_eligible]
    return result


# -- ordering --------------------------------------------------------------

def rank_key(firm: FirmRecord, ctx: FounderContext, q: FilterQuery) -> tuple:
    """Sort key; smaller is better.

    Tie-break metrics in priority order: investors matching query topics,
    featured investors, industry overlap, city overlap, founder
    conversations, verified investors, then firm name. Topic matching is
    skipped without a topic filter; industry and city overlap fall back to
    the founder's profile and are skipped when neither is available.
    """
    key: list = []
    if q.topics:
        key.append(-sum(1 for i in firm.investors if i.topics & q.topics))
    key.append(-firm.featured_investor_count)
    industries = q.industries or ctx.industries
    if industries:
        key.append(-len(firm.industries & industries))
    cities = q.cities or ctx.cities
    if cities:
        key.append(-len(firm.cities & cities))
    key.append(-firm.conversation_count)
    key.append(-firm.verified_investor_count)
    key.append(firm.name.lower())
    key.append(firm.firm_id)
    return tuple(key)


def rank_firms(firms: Iterable[FirmRecord], ctx: FounderContext | None, q: FilterQuery) -> list[FirmRecord]:
    ctx = ctx or FounderContext()
    return sorted(firms, key=lambda f: rank_key(f, ctx, q))


def _column_key(column: str):
    if column == "name":
        return lambda f: (f.name.lower(), f.firm_id)
    if column == "hq":
        return lambda f: (f.hq_city.lower(), f.firm_id)
    if column == "pace":
        return lambda f: (f.investments_last_year, f.firm_id)
    if column == "stage":
        last = len(STAGE_RANK)
        return lambda f: (min((STAGE_RANK[s] for s in f.stages), default=last), f.firm_id)
    raise InvalidQuery(f"cannot sort by {column!r}")


def sort_by_column(firms: Sequence[FirmRecord], column: str, descending: bool = False) -> list[FirmRecord]:
    """Override the custom order with a column's natural order."""
    return sorted(firms, key=_column_key(column), reverse=descending)


def filter_and_search(catalog: Catalog, founder_context: FounderContext | None,
                      q: FilterQuery) -> list[FirmRecord]:
    q.validate()
    _check_references(catalog, q)
    firms = sorted(catalog.firms.values(), key=lambda f: f.firm_id)
    if q.search:
        firms = search_firms(firms, q.search)
    firms = apply_filters(catalog, firms, q)
    ordered = rank_firms(firms, founder_context, q)
    if q.sort_by:
        ordered = sort_by_column(ordered, q.sort_by, q.descending)
    return ordered


def best_partner_match(firm: FirmRecord, q: FilterQuery) -> InvestorRecord | None:
    """The firm's partner who best fits the query's search string and topics."""
    if not q.search and not q.topics:
        return None
    search = (q.search or "").strip().lower()
    tokens = set(search.split())
    best = None
    best_key = None
    for inv in firm.investors:
        exact = 0
        if search:
            first, last = inv.first_name.lower(), inv.last_name.lower()
            if search == inv.full_name.lower() or first in tokens or last in tokens:
                exact = 2
            elif investor_name_matches(inv, search):
                exact = 1
        overlap = len(inv.topics & q.topics)
        if exact == 0 and overlap == 0:
            continue
        key = (-exact, -overlap, inv.full_name.lower(), inv.investor_id)
        if best_key is None or key < best_key:
            best, best_key = inv, key
    return best


def top_industries(catalog: Catalog, firm: FirmRecord, n: int = 3) -> list[str]:
    """Firm industries ordered by how often they appear in its portfolio."""
    counts = Counter(i for cid in firm.investments if cid in catalog.companies
                     for i in catalog.companies[cid].industries)
    return sorted(firm.industries, key=lambda i: (-counts[i], i))[:n]
