import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from folnerflow.graphs import (GeneratorSet, GraphError, apply_word, boundary,
                               build_cayley_window, components, free_ball_size,
                               graph_from_doc, graph_to_doc, induced_components,
                               load_graph, neighborhood, parse_word,
                               save_graph, zd_ball_size, zd_box)
from conftest import cycle_graph, path_graph


def test_z1_window_shape(z1_r6):
    g = build_cayley_window("z", dim=1, radius=3)
    assert len(g) == 7
    assert g.edge_count() == 6
    assert sorted(g.interior) == sorted(str(i) for i in range(-2, 3))


def test_z2_radius1_diamond():
    g = build_cayley_window("z", dim=2, radius=1)
    assert len(g) == 5
    assert g.edge_count() == 4


def test_free_sphere_sizes():
    g = build_cayley_window("free", dim=2, radius=2)
    assert len(g) == 1 + 4 + 12
    by_len = {}
    for v in g.vertices:
        by_len[len(v)] = by_len.get(len(v), 0) + 1
    assert by_len == {0: 1, 1: 4, 2: 12}


@pytest.mark.parametrize("dim,radius", [(1, 5), (2, 4), (3, 3)])
def test_lattice_counts_match_closed_form(dim, radius):
    g = build_cayley_window("z", dim=dim, radius=radius)
    assert len(g) == zd_ball_size(dim, radius)
    assert len(g.interior) == zd_ball_size(dim, radius - 1)


@pytest.mark.parametrize("rank,radius", [(1, 6), (2, 4), (3, 3)])
def test_free_counts_match_closed_form(rank, radius):
    g = build_cayley_window("free", dim=rank, radius=radius)
    assert len(g) == free_ball_size(rank, radius)


def test_apply_word_examples():
    g = build_cayley_window("z", dim=1, radius=3)
    assert apply_word(g, (), "2") == "2"
    assert apply_word(g, ("+1",), "2") == "3"
    assert apply_word(g, ("+1", "+1"), "3") is None


def test_left_action_on_free_group():
    g = build_cayley_window("free", dim=2, radius=3)
    # labels multiply on the left: a.(ab) = aab, A.(ab) = b
    assert apply_word(g, ("a",), "ab") == "aab"
    assert apply_word(g, ("A",), "ab") == "b"
    # word letters apply right-to-left: (ab).v = a.(b.v)
    assert apply_word(g, ("a", "b"), "") == "ab"


def test_label_action_is_partial_bijection(f2_r4, z2_r12):
    for g in (f2_r4, z2_r12):
        for s in g.generators.labels:
            seen = {}
            for v in g.vertices:
                u = g.act(s, v)
                if u is None:
                    continue
                assert u not in seen, "label image repeated"
                seen[u] = v
                assert g.act(g.generators.inverse(s), u) == v


def test_boundary_examples(z1_r6):
    F = [str(i) for i in range(0, 5)]
    assert boundary(z1_r6, F) == ["0", "4"]
    assert boundary(z1_r6, ["0"]) == ["0"]
    g2 = build_cayley_window("z", dim=2, radius=12)
    box = zd_box([(0, 4), (0, 4)])
    rim = boundary(g2, box)
    assert len(rim) == 4 * 5 - 4


def test_boundary_requires_interior(z1_r6):
    with pytest.raises(GraphError):
        boundary(z1_r6, ["6"])


def test_neighborhood_examples(z1_r6, f2_r4):
    assert neighborhood(z1_r6, ["0", "3"], 0) == ["0", "3"]
    assert neighborhood(z1_r6, ["0"], 2) == sorted(str(i) for i in range(-2, 3))
    assert len(neighborhood(f2_r4, [""], 1)) == 5


def test_components_examples():
    path = path_graph(10)
    comps = components(path, ["4"])
    assert comps == [[str(i) for i in range(0, 4)],
                     sorted(str(i) for i in range(5, 10))]
    assert components(path, list(path.vertices)) == []
    assert len(components(path, [])) == 1


def test_components_partition_and_maximality(z2_r12):
    removed = set(zd_box([(-1, 1), (-1, 1)]))
    comps = components(z2_r12, removed)
    everything = set().union(*[set(c) for c in comps]) | removed
    assert everything == z2_r12.vertex_set
    for comp in comps:
        cset = set(comp)
        # maximal: no neighbor of the component lies outside comp + removed
        for v in comp:
            for u in z2_r12.neighbors(v):
                assert u in cset or u in removed


def test_graph_file_roundtrip(tmp_path, f2_r4):
    path = tmp_path / "g.json"
    save_graph(f2_r4, path)
    g2 = load_graph(path)
    assert g2.vertices == f2_r4.vertices
    assert g2.interior == f2_r4.interior
    assert g2.family == f2_r4.family
    assert list(g2.edges()) == list(f2_r4.edges())


def test_load_graph_three_cycle(tmp_path):
    doc = graph_to_doc(cycle_graph(3))
    path = tmp_path / "c3.json"
    path.write_text(json.dumps(doc))
    g = load_graph(path)
    assert len(g) == 3 and g.edge_count() == 3


def test_load_graph_rejects_duplicate_out_edge(tmp_path):
    doc = graph_to_doc(cycle_graph(3))
    doc["edges"].append({"from": "0", "to": "2", "label": "s"})
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(GraphError, match="partial bijection"):
        load_graph(path)


def test_load_graph_rejects_dangling_id(tmp_path):
    doc = graph_to_doc(cycle_graph(3))
    doc["edges"].append({"from": "0", "to": "9", "label": "s"})
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(GraphError, match="unknown vertex id"):
        load_graph(path)


def test_load_graph_rejects_asymmetric_edge(tmp_path):
    doc = graph_to_doc(path_graph(3))
    # keep only one direction of an edge pair by lying about the involution
    doc["edges"] = [{"from": "0", "to": "1", "label": "+1"},
                    {"from": "1", "to": "2", "label": "-1"}]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(GraphError):
        load_graph(path)


def test_interior_requires_full_star():
    gens = GeneratorSet(("+1", "-1"), {"+1": "-1", "-1": "+1"})
    adj = {"0": {"+1": "1"}, "1": {"-1": "0"}}
    with pytest.raises(GraphError, match="lacks edges"):
        from folnerflow.graphs import LabeledGraph
        LabeledGraph(gens, adj, interior={"0"})


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=-4, max_value=4), st.integers(min_value=0, max_value=3))
def test_word_inverse_returns_home(start, n):
    g = build_cayley_window("z", dim=1, radius=9)
    word = ("+1",) * n
    v = str(start)
    out = apply_word(g, word, v)
    assert out == str(start + n)
    back = apply_word(g, g.generators.inverse_word(word), out)
    assert back == v


def test_parse_word_roundtrip():
    assert parse_word("") == ()
    assert parse_word("+1,+1,-2") == ("+1", "+1", "-2")
