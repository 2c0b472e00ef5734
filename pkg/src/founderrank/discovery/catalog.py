"""Investor catalog: firms, their partners, and portfolio companies.

Catalog directories hold three CSV files. List-valued cells use ``;``.

firms.csv
    firm_id, name, hq_city, office_cities, stages, industries, investments,
    investments_last_year, featured_investor_count, verified_investor_count,
    conversation_count, us_only_eligible
investors.csv
    investor_id, first_name, last_name, firm_id, featured, verified,
    topics, industries, email
companies.csv
    company_id, name, industries, city, investor_firm_ids

Featured and verified counts on a firm are derived from its investors
unless the firm row sets ``featured_investor_count`` /
``verified_investor_count`` explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

from ..errors import CatalogError, InputError
from ..fileio import parse_bool, read_csv, split_list, write_csv

FUNDING_STAGES = ("Accelerator", "Angel", "Pre-Seed", "Seed", "Series A", "Series B", "Venture")
STAGE_RANK = {s: i for i, s in enumerate(FUNDING_STAGES)}

INDUSTRIES = (
    "AR/VR", "Blockchain", "Consumer", "Enterprise", "E-Commerce", "Delivery", "SaaS", "AI/ML",
    "Robotics", "Food & Drink", "Mobile", "Healthcare", "Media", "Finance", "Education",
    "Life Sci.", "Retail", "Real Estate", "Travel", "Automotive", "Sports", "Clean Tech", "IoT",
    "Social", "Energy", "Hardware", "Gaming", "Space", "Big Data", "Transportation",
    "Marketplace", "Security", "Government", "Legal",
)
INDUSTRY_SET = frozenset(INDUSTRIES)


def check_industries(values, where: str) -> frozenset:
    values = frozenset(values)
    unknown = values - INDUSTRY_SET
    if unknown:
        raise CatalogError(f"{where}: unknown industries {sorted(unknown)}")
    return values


def check_stages(values, where: str) -> frozenset:
    values = frozenset(values)
    unknown = values - set(FUNDING_STAGES)
    if unknown:
        raise CatalogError(f"{where}: unknown stages {sorted(unknown)}")
    return values


@dataclass(frozen=True)
class InvestorRecord:
    investor_id: str
    first_name: str
    last_name: str
    firm_id: str
    featured: bool = False
    verified: bool = False
    topics: frozenset = frozenset()
    industries: frozenset = frozenset()
    email: str = ""

    @property
    def full_name(self) -> str:
        return f"{self.first_name} {self.last_name}".strip()


@dataclass(frozen=True)
class FirmRecord:
    firm_id: str
    name: str
    hq_city: str = ""
    office_cities: tuple[str, ...] = ()
    stages: frozenset = frozenset()
    industries: frozenset = frozenset()
    investments: tuple[str, ...] = ()
    investments_last_year: int = 0
    featured_investor_count: int = 0
    verified_investor_count: int = 0
    conversation_count: int = 0
    us_only_eligible: bool = False
    investors: tuple[InvestorRecord, ...] = ()

    @property
    def cities(self) -> frozenset:
        """Headquarters plus offices."""
        return frozenset(c for c in (self.hq_city, *self.office_cities) if c)


@dataclass(frozen=True)
class CompanyRecord:
    company_id: str
    name: str
    industries: frozenset = frozenset()
    city: str = ""
    investor_firm_ids: tuple[str, ...] = ()


@dataclass
class Catalog:
    firms: dict[str, FirmRecord] = field(default_factory=dict)
    companies: dict[str, CompanyRecord] = field(default_factory=dict)
    topics: frozenset = frozenset()

    @classmethod
    def build(cls, firms, investors=(), companies=()) -> "Catalog":
        """Attach investors to their firms and validate references."""
        by_firm: dict[str, list[InvestorRecord]] = {}
        for inv in investors:
            by_firm.setdefault(inv.firm_id, []).append(inv)
        firm_map: dict[str, FirmRecord] = {}
        for f in firms:
            if f.firm_id in firm_map:
                raise CatalogError(f"duplicate firm_id {f.firm_id}")
            members = tuple(sorted(by_firm.pop(f.firm_id, []), key=lambda i: i.investor_id))
            if not f.investors and members:
                f = _with_investors(f, members)
            firm_map[f.firm_id] = f
        if by_firm:
            raise CatalogError(f"investors reference unknown firms: {sorted(by_firm)}")
        company_map = {}
        for c in companies:
            if c.company_id in company_map:
                raise CatalogError(f"duplicate company_id {c.company_id}")
            company_map[c.company_id] = c
        topics = frozenset(t for f in firm_map.values() for i in f.investors for t in i.topics)
        return cls(firm_map, company_map, topics)

    def investor_ids(self) -> set[str]:
        return {i.investor_id for f in self.firms.values() for i in f.investors}


def _with_investors(f: FirmRecord, members: tuple[InvestorRecord, ...]) -> FirmRecord:
    return replace(f, investors=members)


def _int(row, key, where) -> int | None:
    value = (row.get(key) or "").strip()
    if value == "":
        return None
    try:
        n = int(value)
    except ValueError as exc:
        raise CatalogError(f"{where}: {key} is not an integer: {value!r}") from exc
    if n < 0:
        raise CatalogError(f"{where}: {key} must be non-negative")
    return n


def load_catalog(directory) -> Catalog:
    directory = Path(directory)
    if not (directory / "firms.csv").exists():
        raise InputError(f"{directory} has no firms.csv")
    investors = []
    if (directory / "investors.csv").exists():
        for n, row in enumerate(read_csv(directory / "investors.csv")):
            where = f"investors.csv row {n + 1}"
            try:
                investors.append(InvestorRecord(
                    investor_id=row["investor_id"].strip(),
                    first_name=(row.get("first_name") or "").strip(),
                    last_name=(row.get("last_name") or "").strip(),
                    firm_id=row["firm_id"].strip(),
                    featured=parse_bool(row.get("featured")),
                    verified=parse_bool(row.get("verified")),
                    topics=frozenset(split_list(row.get("topics"))),
                    industries=check_industries(split_list(row.get("industries")), where),
                    email=(row.get("email") or "").strip().lower(),
                ))
            except KeyError as exc:
                raise CatalogError(f"{where}: missing column {exc}") from exc
    by_firm: dict[str, list] = {}
    for inv in investors:
        by_firm.setdefault(inv.firm_id, []).append(inv)

    firms = []
    for n, row in enumerate(read_csv(directory / "firms.csv")):
        where = f"firms.csv row {n + 1}"
        try:
            firm_id = row["firm_id"].strip()
            name = row["name"].strip()
        except KeyError as exc:
            raise CatalogError(f"{where}: missing column {exc}") from exc
        members = by_firm.get(firm_id, [])
        featured = _int(row, "featured_investor_count", where)
        verified = _int(row, "verified_investor_count", where)
        firms.append(FirmRecord(
            firm_id=firm_id,
            name=name,
            hq_city=(row.get("hq_city") or "").strip(),
            office_cities=tuple(split_list(row.get("office_cities"))),
            stages=check_stages(split_list(row.get("stages")), where),
            industries=check_industries(split_list(row.get("industries")), where),
            investments=tuple(split_list(row.get("investments"))),
            investments_last_year=_int(row, "investments_last_year", where) or 0,
            featured_investor_count=sum(i.featured for i in members) if featured is None else featured,
            verified_investor_count=sum(i.verified for i in members) if verified is None else verified,
            conversation_count=_int(row, "conversation_count", where) or 0,
            us_only_eligible=parse_bool(row.get("us_only_eligible")),
        ))

    companies = []
    if (directory / "companies.csv").exists():
        for n, row in enumerate(read_csv(directory / "companies.csv")):
            where = f"companies.csv row {n + 1}"
            try:
                companies.append(CompanyRecord(
                    company_id=row["company_id"].strip(),
                    name=(row.get("name") or "").strip(),
                    industries=check_industries(split_list(row.get("industries")), where),
                    city=(row.get("city") or "").strip(),
                    investor_firm_ids=tuple(split_list(row.get("investor_firm_ids"))),
                ))
            except KeyError as exc:
                raise CatalogError(f"{where}: missing column {exc}") from exc
    return Catalog.build(firms, investors, companies)


FIRM_FIELDS = ["firm_id", "name", "hq_city", "office_cities", "stages", "industries", "investments",
               "investments_last_year", "featured_investor_count", "verified_investor_count",
               "conversation_count", "us_only_eligible"]
INVESTOR_FIELDS = ["investor_id", "first_name", "last_name", "firm_id", "featured", "verified",
                   "topics", "industries", "email"]
COMPANY_FIELDS = ["company_id", "name", "industries", "city", "investor_firm_ids"]


def save_catalog(catalog: Catalog, directory) -> None:
    directory = Path(directory)

    def joined(items, key=None):
        return ";".join(sorted(items, key=key))

    stage_key = STAGE_RANK.get
    firms = []
    investors = []
    for f in sorted(catalog.firms.values(), key=lambda f: f.firm_id):
        firms.append({
            "firm_id": f.firm_id, "name": f.name, "hq_city": f.hq_city,
            "office_cities": ";".join(f.office_cities), "stages": joined(f.stages, stage_key),
            "industries": joined(f.industries), "investments": ";".join(f.investments),
            "investments_last_year": f.investments_last_year,
            "featured_investor_count": f.featured_investor_count,
            "verified_investor_count": f.verified_investor_count,
            "conversation_count": f.conversation_count,
            "us_only_eligible": str(f.us_only_eligible).lower(),
        })
        for i in f.investors:
            investors.append({
                "investor_id": i.investor_id, "first_name": i.first_name, "last_name": i.last_name,
                "firm_id": i.firm_id, "featured": str(i.featured).lower(),
                "verified": str(i.verified).lower(), "topics": joined(i.topics),
                "industries": joined(i.industries), "email": i.email,
            })
    companies = [{
        "company_id": c.company_id, "name": c.name, "industries": joined(c.industries),
        "city": c.city, "investor_firm_ids": ";".join(c.investor_firm_ids),
    } for c in sorted(catalog.companies.values(), key=lambda c: c.company_id)]
    write_csv(directory / "firms.csv", FIRM_FIELDS, firms)
    write_csv(directory / "investors.csv", INVESTOR_FIELDS, investors)
    write_csv(directory / "companies.csv", COMPANY_FIELDS, companies)
