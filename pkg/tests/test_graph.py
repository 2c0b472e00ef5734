import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from founderrank import graph as gm
from founderrank.errors import CorruptSnapshot, InputError, UnsupportedVersion
from founderrank.fileio import write_csv
from founderrank.graph import (FLAG_FOUNDER, FLAG_FUND, FLAG_INVESTOR, FOUNDER, INVESTOR, PERSON, CommGraph,
                               GraphDelta, apply_delta, prune_outliers, remove_orphans, resolve_label)

NODES = ["a@x.io", "b@x.io", "c@x.io", "d@x.io", "pub:p1"]

edge_maps = st.dictionaries(
    st.tuples(st.sampled_from(NODES), st.sampled_from(NODES)).filter(lambda e: e[0] != e[1]),
    st.integers(1, 5), max_size=8)
label_maps = st.dictionaries(st.sampled_from(NODES),
                             st.frozensets(st.sampled_from([FLAG_FOUNDER, FLAG_INVESTOR, FLAG_FUND])),
                             max_size=4)
deltas = st.builds(GraphDelta, edge_maps, label_maps)


def test_resolve_label_cases():
    assert resolve_label(True, True, True) == INVESTOR
    assert resolve_label(True, True, False) == FOUNDER
    assert resolve_label(True, False, False) == FOUNDER
    assert resolve_label(False, True, False) == INVESTOR
    assert resolve_label(False, False, True) == PERSON
    assert resolve_label(False, False, False) == PERSON


def test_empty_delta_is_identity():
    g = CommGraph({}, {("a@x.io", "b@x.io"): 3})
    assert apply_delta(g, GraphDelta({}, {})) == g


def test_weights_add():
    g = CommGraph({}, {("a@x.io", "b@x.io"): 3})
    out = apply_delta(g, GraphDelta({("a@x.io", "b@x.io"): 2}, {}))
    assert out.weight("a@x.io", "b@x.io") == 5


def test_new_node_is_person_with_no_edges():
    g = CommGraph({}, {("a@x.io", "b@x.io"): 1})
    out = apply_delta(g, GraphDelta({}, {"c@x.io": frozenset()}))
    assert "c@x.io" in out
    assert out.label("c@x.io") == PERSON
    assert out.in_degree("c@x.io") == out.out_degree("c@x.io") == 0


def test_graph_rejects_bad_edges():
    with pytest.raises(ValueError):
        CommGraph({}, {("a@x.io", "a@x.io"): 1})
    with pytest.raises((InputError, ValueError)):
        CommGraph({}, {("a@x.io", "b@x.io"): 0})
    with pytest.raises((InputError, ValueError)):
        GraphDelta({("a@x.io", "b@x.io"): -1}, {})


def test_remove_orphans_examples():
    g = CommGraph({"c@x.io": ()}, {("a@x.io", "b@x.io"): 1})
    assert set(remove_orphans(g).nodes) == {"a@x.io", "b@x.io"}
    h = CommGraph({}, {("a@x.io", "b@x.io"): 1})
    assert remove_orphans(h) == h
    only = CommGraph({"a@x.io": (), "b@x.io": ()}, {})
    assert len(remove_orphans(only)) == 0


def test_snapshot_roundtrip_keeps_weight(tmp_path):
    g = CommGraph({"a@x.io": {FLAG_FOUNDER}, "c@x.io": {FLAG_INVESTOR}},
                  {("a@x.io", "b@x.io"): 7, ("b@x.io", "c@x.io"): 1})
    path = tmp_path / "g.snap"
    gm.save(g, path)
    back = gm.load(path)
    assert back == g
    assert back.weight("a@x.io", "b@x.io") == 7
    assert back.label("a@x.io") == FOUNDER and back.label("c@x.io") == INVESTOR


def test_truncated_snapshot_is_corrupt():
    g = CommGraph({}, {("a@x.io", "b@x.io"): 7, ("b@x.io", "c@x.io"): 1})
    text = gm.dumps(g)
    for cut in (len(text) // 2, len(text) - 5):
        with pytest.raises(CorruptSnapshot):
            gm.loads(text[:cut])


def test_unknown_snapshot_version():
    text = gm.dumps(CommGraph({}, {("a@x.io", "b@x.io"): 1})).replace("founderrank-graph 1", "founderrank-graph 9")
    with pytest.raises(UnsupportedVersion):
        gm.loads(text)


def test_snapshot_bytes_are_canonical():
    e1 = {("b@x.io", "c@x.io"): 1, ("a@x.io", "b@x.io"): 2}
    e2 = dict(reversed(list(e1.items())))
    assert gm.dumps(CommGraph({}, e1)) == gm.dumps(CommGraph({}, e2))


def test_prune_outliers_disabled_by_default():
    g = CommGraph({}, {("hub@x.io", f"n{i}@x.io"): 1 for i in range(10)})
    assert prune_outliers(g, None) == g
    pruned = prune_outliers(g, 90)
    assert "hub@x.io" not in pruned


def test_label_csv_roundtrip(tmp_path):
    flags = {"a@x.io": {FLAG_FOUNDER}, "b@x.io": {FLAG_FOUNDER, FLAG_INVESTOR, FLAG_FUND}, "c@x.io": set()}
    write_csv(tmp_path / "l.csv", gm.LABEL_FIELDS, gm.label_rows(flags))
    back = gm.read_labels(tmp_path / "l.csv")
    assert back == {k: frozenset(v) for k, v in flags.items()}


@given(edge_maps, deltas)
def test_total_weight_conserved(edges, d):
    g = CommGraph({}, edges)
    assert apply_delta(g, d).total_weight() == g.total_weight() + d.total_weight()


@given(deltas, deltas, deltas)
def test_merge_associative_and_commutative(a, b, c):
    assert a.merge(b) == b.merge(a)
    assert a.merge(b).merge(c) == a.merge(b.merge(c))


@given(edge_maps, label_maps)
def test_remove_orphans_idempotent(edges, labels):
    g = CommGraph(labels, edges)
    once = remove_orphans(g)
    assert remove_orphans(once) == once


@settings(max_examples=60)
@given(st.lists(deltas, max_size=6))
def test_labels_exclusive_after_any_sequence(seq):
    g = CommGraph()
    for d in seq:
        g = apply_delta(g, d)
        for n in g.nodes:
            assert g.label(n) in (PERSON, FOUNDER, INVESTOR)
            assert g.label(n) == gm.label_from_flags(g.flags[n])


@given(edge_maps, label_maps)
def test_snapshot_roundtrip_property(edges, labels):
    g = CommGraph(labels, edges)
    assert gm.loads(gm.dumps(g)) == g


def test_delta_dict_roundtrip():
    d = GraphDelta({("a@x.io", "b@x.io"): 2}, {"a@x.io": frozenset({FLAG_FOUNDER})})
    assert GraphDelta.from_dict(d.to_dict()) == d
