import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from founderrank.communities import Partition, community_stats, label_propagation, louvain
from founderrank.errors import NonConvergence
from founderrank.graph import FOUNDER, PERSON, CommGraph
from oracles import random_graph


def triangles():
    edges = {}
    for a, b, c in (("a", "b", "c"), ("x", "y", "z")):
        edges.update({(a, b): 1, (b, c): 1, (c, a): 1})
    return CommGraph({}, edges)


def components(g):
    return sorted(sorted(c) for c in g.weakly_connected_components())


def test_two_triangles_give_two_communities():
    for seed in range(10):
        p = label_propagation(triangles(), seed=seed)
        assert sorted(sorted(m) for m in p.communities.values()) == components(triangles())
        assert set(p.communities) == {"a", "x"}


def test_single_and_empty():
    p = label_propagation(CommGraph({"solo": ()}, {}), seed=0)
    assert p.communities == {"solo": frozenset({"solo"})}
    assert len(label_propagation(CommGraph(), seed=0)) == 0


def test_nonconvergence_carries_partial_partition():
    g = random_graph(random.Random(2), 30, density=0.3)
    try:
        label_propagation(g, seed=1, max_iter=1)
    except NonConvergence as exc:
        assert isinstance(exc.partial, Partition)
        assert set(exc.partial.assignment) == set(g.nodes)
    else:
        pytest.skip("converged in one sweep")


def test_community_stats_examples():
    p = Partition.from_groups([{"F1", "F2"}, {"F3"}])
    labels = dict.fromkeys(["F1", "F2", "F3"], FOUNDER)
    stats = community_stats(p, labels)
    assert stats.count == 2 and stats.mean_founders == 1.5
    assert community_stats(p, dict.fromkeys(labels, PERSON)).mean_founders == 0
    four = Partition.from_groups([{"a", "b", "c", "d"}, {"e"}])
    top = community_stats(four, {**dict.fromkeys("abcd", FOUNDER), "e": PERSON}, top_k=1).top
    assert top == [("a", 4, 4)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 50))
def test_partition_properties(graph_seed, seed):
    g = random_graph(random.Random(graph_seed), 25)
    p = label_propagation(g, seed=seed)
    # total, inverse image, canonical ids
    assert set(p.assignment) == set(g.nodes)
    for cid, members in p.communities.items():
        assert cid == min(members)
        assert all(p.assignment[m] == cid for m in members)
    # never spans weakly-connected components, always internally connected
    comp_of = {n: i for i, c in enumerate(g.weakly_connected_components()) for n in c}
    for members in p.communities.values():
        assert len({comp_of[m] for m in members}) == 1
        start = min(members)
        seen, stack = {start}, [start]
        while stack:
            u = stack.pop()
            for v in g.neighbors(u):
                if v in members and v not in seen:
                    seen.add(v)
                    stack.append(v)
        assert seen == set(members)
    assert label_propagation(g, seed=seed) == p


def test_louvain_respects_components():
    g = triangles()
    p = louvain(g, seed=0)
    assert sorted(sorted(m) for m in p.communities.values()) == components(g)
    assert louvain(g, seed=0) == p
