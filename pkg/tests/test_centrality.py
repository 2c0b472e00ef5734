import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from founderrank.centrality import (MetricTable, betweenness, closeness, compute_metrics, metric_rows, pagerank,
                                    scale_unit, table_from_rows)
from founderrank.errors import NonConvergence
from founderrank.graph import CommGraph
from founderrank.synth import SynthSpec, generate
from oracles import brute_betweenness, brute_closeness, dense_pagerank, random_graph


def chain(*nodes):
    return {(a, b): 1 for a, b in zip(nodes, nodes[1:])}


def test_pagerank_cycle_is_uniform():
    g = CommGraph({}, chain("a", "b", "c", "d", "a"))
    for v in pagerank(g).values():
        assert v == pytest.approx(0.25, abs=1e-12)


def test_pagerank_star_matches_dense_solve():
    g = CommGraph({}, {("l1", "hub"): 1, ("l2", "hub"): 1, ("l3", "hub"): 1})
    want = dense_pagerank(g)
    got = pagerank(g)
    assert got["hub"] == pytest.approx(want["hub"], abs=1e-10)
    # hub is dangling: x_hub = 0.15/4 + 0.85 (3 x_leaf + x_hub / 4) with 3 x_leaf = 1 - x_hub,
    # so x_hub = 0.8875 / 1.6375 = 71/131
    assert got["hub"] == pytest.approx(71 / 131, abs=1e-9)


def test_pagerank_single_node():
    assert pagerank(CommGraph({"solo": ()}, {})) == {"solo": 1.0}


def test_pagerank_reports_nonconvergence():
    g = CommGraph({}, chain("a", "b", "c", "a"))
    with pytest.raises(NonConvergence):
        pagerank(CommGraph({}, {("a", "b"): 1, ("c", "a"): 1}), tol=1e-30, max_iter=3)
    with pytest.raises(ValueError):
        pagerank(g, damping=1.0)


def test_betweenness_path_and_triangle():
    g = CommGraph({"z": ()}, chain("a", "b", "c"))
    raw = betweenness(g)
    # (N-1)(N-2) = 6 with the isolated node included
    assert raw["b"] * 6 == pytest.approx(1.0)
    assert raw["z"] == 0.0
    full = CommGraph({}, {(a, b): 1 for a in "xyz" for b in "xyz" if a != b})
    assert set(betweenness(full).values()) == {0.0}


def test_closeness_examples():
    star = CommGraph({}, {e: 1 for leaf in ("l1", "l2", "l3") for e in (("c", leaf), (leaf, "c"))})
    assert closeness(star)["c"] == pytest.approx(1.0)
    g = CommGraph({}, chain("a", "b", "c"))
    c = closeness(g)
    assert c["a"] == pytest.approx(0.75)
    assert c["c"] == 0.0


def test_scale_unit_examples():
    assert scale_unit({"a": 2, "b": 4, "c": 6}) == {"a": 0.0, "b": 0.5, "c": 1.0}
    assert scale_unit({"a": 5, "b": 5}) == {"a": 0.0, "b": 0.0}
    assert scale_unit({"a": -1, "b": 0, "c": 3}) == {"a": 0.0, "b": 0.25, "c": 1.0}


def test_oracle_equivalence_on_random_graphs():
    rng = random.Random(11)
    for _ in range(25):
        g = random_graph(rng, 25)
        bb, bc, pr = brute_betweenness(g), brute_closeness(g), dense_pagerank(g)
        got_b, got_c, got_p = betweenness(g), closeness(g), pagerank(g)
        for v in g.nodes:
            assert got_b[v] == pytest.approx(bb[v], abs=1e-9)
            assert got_c[v] == pytest.approx(bc[v], abs=1e-9)
            assert got_p[v] == pytest.approx(pr[v], abs=1e-8)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_pagerank_sums_to_one(seed):
    g = random_graph(random.Random(seed), 20)
    assert sum(pagerank(g).values()) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_metrics_invariant_under_relabeling(seed):
    rng = random.Random(seed)
    g = random_graph(rng, 15)
    names = list(g.nodes)
    shuffled = names[:]
    rng.shuffle(shuffled)
    rename = {a: f"r{b}" for a, b in zip(names, shuffled)}
    h = CommGraph({rename[n]: () for n in names}, {(rename[a], rename[b]): w for (a, b), w in g.edges.items()})
    for fn in (pagerank, betweenness, closeness):
        x, y = fn(g), fn(h)
        for n in names:
            assert y[rename[n]] == pytest.approx(x[n], abs=1e-9)


def test_scaled_metrics_span_unit_interval():
    g = random_graph(random.Random(3), 20, density=0.2)
    table = compute_metrics(g)
    for name in ("pagerank", "betweenness", "closeness"):
        values = [getattr(m, name) for m in table.scaled.values()]
        assert min(values) == 0.0
        assert max(values) in (0.0, 1.0)


def test_metric_table_defaults_to_zero_and_roundtrips():
    g = CommGraph({}, chain("a", "b", "c"))
    table = compute_metrics(g)
    assert table.get("missing").as_tuple() == (0.0, 0.0, 0.0)
    back = table_from_rows(metric_rows(table))
    assert isinstance(back, MetricTable)
    assert back.scaled == table.scaled and back.raw == table.raw


def test_betweenness_tracks_pagerank_on_preferential_attachment():
    world = generate(SynthSpec(founders=40, investors=40, others=120, seed=5))
    g = world.graph
    pr, bc = pagerank(g), betweenness(g)
    x = np.array([pr[n] for n in g.nodes])
    y = np.array([bc[n] for n in g.nodes])
    assert np.corrcoef(x, y)[0, 1] > 0.7
