"""Seeded catalog and query generators shared by the discovery tests."""

from __future__ import annotations

import random
from dataclasses import replace

from founderrank.discovery import (FUNDING_STAGES, INDUSTRIES, Catalog, CompanyRecord, FilterQuery, FirmRecord,
                                   InvestorRecord)

CITIES = ["San Francisco", "New York", "Boston", "Austin", "Seattle", "London", "Berlin", "Chicago"]
TOPICS = [f"topic{i}" for i in range(12)]
FIRST = ["Ann", "Anna", "Bob", "Carla", "Dev", "Eve", "Hank", "Ivy", "Jo", "Kai", "Lee", "Mo"]
LAST = ["Annis", "Baker", "Chen", "Diaz", "Evans", "Fox", "Gray", "Hill", "Ito", "Jones"]
WORDS = ["Alpha", "Beacon", "Cedar", "Delta", "Ember", "Forge", "Granite", "Harbor", "Iris", "Juniper"]
INDUSTRY_POOL = list(INDUSTRIES[:10])


def fixture_catalog(seed: int = 0, n_firms: int = 200, n_companies: int = 150) -> Catalog:
    rng = random.Random(seed)
    companies = [CompanyRecord(f"c{i:03d}", f"Co {i}", frozenset(rng.sample(INDUSTRY_POOL, rng.randint(1, 3))),
                               rng.choice(CITIES)) for i in range(n_companies)]
    firms, investors = [], []
    for i in range(n_firms):
        fid = f"f{i:03d}"
        members = []
        for j in range(rng.randint(1, 3)):
            members.append(InvestorRecord(f"{fid}-{j}", rng.choice(FIRST), rng.choice(LAST), fid,
                                          featured=rng.random() < 0.3, verified=rng.random() < 0.5,
                                          topics=frozenset(rng.sample(TOPICS, rng.randint(0, 2)))))
        investors += members
        hq = rng.choice(CITIES)
        # few distinct names so the name tie-break gets exercised
        name = f"{rng.choice(WORDS)} {rng.choice(['Capital', 'Ventures'])}"
        firms.append(FirmRecord(
            fid, name, hq, tuple(rng.sample([c for c in CITIES if c != hq], rng.randint(0, 2))),
            frozenset(rng.sample(FUNDING_STAGES, rng.randint(1, 3))),
            frozenset(rng.sample(INDUSTRY_POOL, rng.randint(1, 4))),
            tuple(sorted(rng.sample([c.company_id for c in companies], rng.randint(0, 6)))),
            rng.randint(0, 30), sum(m.featured for m in members), sum(m.verified for m in members),
            rng.randint(0, 2), rng.random() < 0.7))
    return Catalog.build(firms, investors, companies)


def random_query(rng: random.Random, catalog: Catalog) -> FilterQuery:
    def maybe(pool, k=2):
        return frozenset(rng.sample(pool, rng.randint(1, k))) if rng.random() < 0.35 else frozenset()

    search = None
    if rng.random() < 0.3:
        search = rng.choice([rng.choice(FIRST), rng.choice(LAST), rng.choice(WORDS).lower(),
                             f"{rng.choice(FIRST)} {rng.choice(LAST)}", "an", "ven"])
    return FilterQuery(
        stages=maybe(list(FUNDING_STAGES)), industries=maybe(INDUSTRY_POOL, 3), industries_and=rng.random() < 0.5,
        cities=maybe(CITIES), cities_invested_in=rng.random() < 0.5,
        related_companies=maybe(sorted(catalog.companies), 3), related_similar=rng.random() < 0.5,
        topics=maybe(sorted(catalog.topics)), us_only=rng.random() < 0.2, search=search)


def strengthen(rng: random.Random, q: FilterQuery, catalog: Catalog) -> FilterQuery:
    """A query whose result can only be a subset of ``q``'s."""
    moves = []
    if not q.stages:
        moves.append(lambda: replace(q, stages=frozenset([rng.choice(FUNDING_STAGES)])))
    if not q.industries:
        moves.append(lambda: replace(q, industries=frozenset(rng.sample(INDUSTRY_POOL, 2))))
    elif not q.industries_and:
        moves.append(lambda: replace(q, industries_and=True))
    else:
        moves.append(lambda: replace(q, industries=q.industries | {rng.choice(INDUSTRY_POOL)}))
    if not q.cities:
        moves.append(lambda: replace(q, cities=frozenset([rng.choice(CITIES)])))
    if not q.related_companies:
        moves.append(lambda: replace(q, related_companies=frozenset(rng.sample(sorted(catalog.companies), 2))))
    if not q.topics:
        moves.append(lambda: replace(q, topics=frozenset([rng.choice(sorted(catalog.topics))])))
    if not q.us_only:
        moves.append(lambda: replace(q, us_only=True))
    if not q.search:
        moves.append(lambda: replace(q, search=rng.choice(FIRST)))
    return rng.choice(moves)()
