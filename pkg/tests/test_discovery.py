import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from founderrank.discovery import (Catalog, CompanyRecord, FilterQuery, FirmRecord, FounderContext,
                                   InvestorRecord, associate_topics, best_partner_match, covering_industries,
                                   filter_and_search, guess_column_mapping, hub_cities, infer_point_partner,
                                   infer_stages, levenshtein, load_catalog, save_catalog)
from founderrank.discovery.engine import sort_by_column
from founderrank.errors import InvalidQuery, UnknownCompanyId, UnknownTopicId
from fixtures import CITIES, fixture_catalog, random_query, strengthen
from oracles import naive_filter, recursive_levenshtein

CATALOG = fixture_catalog(0)


def company(cid, *industries, city=""):
    return CompanyRecord(cid, cid, frozenset(industries), city)


def firm(fid, name=None, **kw):
    return FirmRecord(fid, name or fid, **kw)


def test_covering_industries_examples():
    assert covering_industries([company("1", "SaaS"), company("2", "SaaS", "AI/ML"), company("3", "AI/ML")]) \
        == ["AI/ML", "SaaS"]
    assert covering_industries([company(str(i), "SaaS") for i in range(3)]) == ["SaaS"]
    assert covering_industries([]) == []


@given(st.lists(st.frozensets(st.sampled_from(["SaaS", "AI/ML", "Mobile", "Media", "IoT"]), min_size=1),
                max_size=12))
def test_covering_industries_covers(sets):
    picked = set(covering_industries([CompanyRecord(str(i), "", s) for i, s in enumerate(sets)]))
    assert all(s & picked for s in sets)


def test_stage_and_topic_thresholds():
    assert infer_stages(["Seed", "Seed", "Series A"]) == {"Seed"}
    assert infer_stages(["Seed", "Series A"]) == {"Seed", "Series A"}
    assert infer_stages([]) == frozenset()
    assert associate_topics({"ai": 0.05}) == {"ai"}
    assert associate_topics({"ai": 0.049}) == frozenset()
    assert associate_topics({}) == frozenset()


def test_hub_city_boundary():
    firms = [firm(f"a{i}", hq_city="Austin", office_cities=("Austin",)) for i in range(50)]
    firms += [firm(f"b{i}", hq_city="Boston") for i in range(49)]
    assert hub_cities(firms) == {"Austin"}
    assert hub_cities([]) == frozenset()


def test_point_partner():
    assert infer_point_partner({"p1": 7, "p2": 2}) == "p1"
    assert infer_point_partner({"p1": 3, "p2": 3}) is None
    assert infer_point_partner({}) is None
    assert infer_point_partner({"p1": 0}) is None


def small_catalog():
    inv = [InvestorRecord("i1", "Anna", "Lee", "f1", topics=frozenset({"fintech"})),
           InvestorRecord("i2", "Bo", "Annis", "f2", topics=frozenset({"robots"})),
           InvestorRecord("i3", "Cy", "Ng", "f3")]
    firms = [firm("f1", "Summit", industries=frozenset({"AI/ML", "SaaS"}), featured_investor_count=0),
             firm("f2", "Ridge", industries=frozenset({"AI/ML"}), featured_investor_count=2),
             firm("f3", "Hollow", industries=frozenset({"SaaS", "Media"}))]
    return Catalog.build(firms, inv, [company("c1", "AI/ML")])


def test_name_search_and_and_mode():
    cat = small_catalog()
    hits = filter_and_search(cat, None, FilterQuery(search="Ann"))
    assert [f.firm_id for f in hits] == ["f2", "f1"]
    assert best_partner_match(cat.firms["f1"], FilterQuery(search="Anna")).investor_id == "i1"
    both = filter_and_search(cat, None, FilterQuery(industries=frozenset({"AI/ML", "SaaS"}), industries_and=True))
    assert [f.firm_id for f in both] == ["f1"]
    either = filter_and_search(cat, None, FilterQuery(industries=frozenset({"AI/ML", "SaaS"})))
    assert len(either) == 3
    assert [f.firm_id for f in filter_and_search(cat, None, FilterQuery())] == ["f2", "f3", "f1"]


def test_best_partner_match_rules():
    cat = small_catalog()
    assert best_partner_match(cat.firms["f1"], FilterQuery(topics=frozenset({"fintech"}))).investor_id == "i1"
    assert best_partner_match(cat.firms["f1"], FilterQuery()) is None
    assert best_partner_match(cat.firms["f3"], FilterQuery(search="zz")) is None


def test_query_errors():
    cat = small_catalog()
    with pytest.raises(InvalidQuery):
        filter_and_search(cat, None, FilterQuery(search="a"))
    with pytest.raises(UnknownCompanyId):
        filter_and_search(cat, None, FilterQuery(related_companies=frozenset({"nope"})))
    with pytest.raises(UnknownTopicId):
        filter_and_search(cat, None, FilterQuery(topics=frozenset({"nope"})))
    with pytest.raises(InvalidQuery):
        FilterQuery.from_dict({"colour": "red"})
    with pytest.raises(InvalidQuery):
        FilterQuery.from_dict({"industries": ["Knitting"]})


def test_featured_and_name_ties():
    a = firm("x1", "Zeta", featured_investor_count=2)
    b = firm("x2", "Alpha")
    c = firm("x3", "alpha")
    cat = Catalog.build([a, b, c])
    assert [f.firm_id for f in filter_and_search(cat, None, FilterQuery())] == ["x1", "x2", "x3"]


def test_column_sort_override():
    out = sort_by_column(list(CATALOG.firms.values()), "pace", descending=True)
    paces = [f.investments_last_year for f in out]
    assert paces == sorted(paces, reverse=True)
    q = FilterQuery(sort_by="name")
    names = [f.name.lower() for f in filter_and_search(CATALOG, None, q)]
    assert names == sorted(names)


def test_matches_naive_oracle():
    rng = random.Random(11)
    contexts = [FounderContext(), FounderContext(frozenset({"SaaS"}), frozenset({"Boston"}))]
    for _ in range(60):
        q = random_query(rng, CATALOG)
        ctx = rng.choice(contexts)
        got = [f.firm_id for f in filter_and_search(CATALOG, ctx, q)]
        assert got == [f.firm_id for f in naive_filter(CATALOG, ctx, q)]


def test_strengthening_never_enlarges():
    rng = random.Random(12)
    for _ in range(60):
        q = random_query(rng, CATALOG)
        stronger = strengthen(rng, q, CATALOG)
        assert {f.firm_id for f in filter_and_search(CATALOG, None, stronger)} <= \
            {f.firm_id for f in filter_and_search(CATALOG, None, q)}


def test_full_query_is_founder_independent():
    q = FilterQuery(industries=frozenset({"SaaS", "Mobile"}), cities=frozenset(CITIES[:4]))
    one = filter_and_search(CATALOG, FounderContext(frozenset({"Media"}), frozenset({"Berlin"})), q)
    two = filter_and_search(CATALOG, FounderContext(frozenset({"IoT"}), frozenset({"Austin"})), q)
    assert one == two


def test_catalog_roundtrip(tmp_path):
    save_catalog(CATALOG, tmp_path)
    assert load_catalog(tmp_path) == CATALOG


def test_levenshtein_examples_and_mapping():
    assert levenshtein("kitten", "sitting") == 3
    assert guess_column_mapping(["Firm"]) == {0: "firm"}
    assert guess_column_mapping(["Investor Nme"]) == {0: "investor name"}
    assert levenshtein("investor nme", "investor name") == 1
    assert guess_column_mapping(["zzzz"]) == {}
    assert guess_column_mapping(["Email", "E-mail"]) == {0: "email"}
    with pytest.raises(ValueError):
        guess_column_mapping([])


@settings(max_examples=200)
@given(st.text("abcde", max_size=7), st.text("abcde", max_size=7))
def test_levenshtein_matches_recursive(a, b):
    assert levenshtein(a, b) == recursive_levenshtein(a, b)


@settings(max_examples=50)
@given(st.lists(st.text("abcdefirmt ", min_size=1, max_size=12), min_size=1, max_size=6))
def test_mapping_is_one_to_one_and_within_cutoff(headers):
    mapping = guess_column_mapping(headers)
    assert len(set(mapping.values())) == len(mapping)
    for i, name in mapping.items():
        assert levenshtein(headers[i].strip().lower(), name) <= 3
