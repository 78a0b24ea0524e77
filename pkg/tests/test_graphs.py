import math

import pytest
from hypothesis import given, settings, strategies as st

from homlab.graphs import (FiniteBoard, ball_tree, boundary, box_z2, build_constraint_graph,
                           closure, distance, generate_board, generate_named, neighborhood,
                           path_board, with_exterior_ring)


def test_hard_core_from_edge_list():
    H = build_constraint_graph(["0", "1"], [("0", "0"), ("0", "1")])
    assert H.loops() == ("0",)
    assert H == generate_named("H_phi")


def test_single_looped_vertex():
    H = build_constraint_graph(["v"], [("v", "v")])
    assert H.loops() == ("v",)
    assert H.neighbors("v") == {"v"}


def test_counterexample_graph_loops():
    H = generate_named("counterexample_abcd")
    assert H.loops() == ("a", "b", "c")
    assert H.neighbors("d") == {"b", "c"}


def test_edges_are_unordered():
    H = build_constraint_graph(["x", "y"], [("y", "x"), ("x", "y")])
    assert len(H.edges) == 1 and H.adjacent("x", "y") and H.adjacent("y", "x")


@pytest.mark.parametrize("verts, edges", [
    ([], []),
    (["a", "a"], []),
    (["a"], [("a", "b")]),
])
def test_graph_validation(verts, edges):
    with pytest.raises(ValueError):
        build_constraint_graph(verts, edges)


def test_looped_complete_graph():
    H = generate_named("K_n_looped", {"n": 3})
    assert len(H.edges) == 6
    assert all(H.adjacent(u, v) for u in H.vertices for v in H.vertices)


def test_barbell_one():
    H = generate_named("barbell_n", {"n": 1})
    assert H.vertices == ("0", "1", "2")
    assert H.edges == {frozenset({"0"}), frozenset({"0", "1"}), frozenset({"1", "2"}), frozenset({"2"})}


def test_h_q_degrees():
    H = generate_named("H_q", {"q": 5})
    assert len(H) == 8
    assert H.degree("a") == 7 and H.degree("b") == 6
    assert not H.adjacent("a", "b") and H.is_looped("a")


def test_unknown_family():
    with pytest.raises(ValueError):
        generate_named("petersen")


def test_box_counts():
    b = box_z2(3, 3)
    assert len(b) == 9 and len(b.adjacency) == 12
    assert b.max_degree == 4 and b.degree(b.at(0, 0)) == 2


def test_ball_tree_count():
    assert len(ball_tree(3, 2)) == 1 + 3 + 3 * 2


def test_minimal_board():
    b = generate_board("path_n", {"n": 2})
    assert len(b) == 2 and b.adjacent(b.sites[0], b.sites[1])


@pytest.mark.parametrize("sites, edges", [
    (("a",), frozenset()),
    (("a", "b"), frozenset({frozenset({"a"})})),
    (("a", "b", "c"), frozenset({frozenset({"a", "b"})})),
])
def test_board_validation(sites, edges):
    with pytest.raises(ValueError):
        FiniteBoard(sites, edges, frozenset(sites))


def test_distances():
    p = path_board(4)
    s = p.sites
    assert distance(p, [s[0]], [s[3]]) == 3
    assert distance(p, [s[0], s[2]], [s[2]]) == 0
    assert distance(p, [s[0]], []) == math.inf


def test_neighbourhoods():
    b = box_z2(3, 3)
    c = b.at(1, 1)
    assert boundary(b, [c]) == {b.at(0, 1), b.at(2, 1), b.at(1, 0), b.at(1, 2)}
    assert neighborhood(b, [c, b.at(0, 0)], 0) == {c, b.at(0, 0)}
    p = path_board(3)
    assert neighborhood(p, [p.sites[1]], 1) == set(p.sites)
    assert closure(b, [c]) == boundary(b, [c]) | {c}


def test_exterior_ring():
    b = with_exterior_ring(box_z2(4, 4), 1)
    assert b.interior == {b.at(x, y) for x in (1, 2) for y in (1, 2)}


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 3), st.data())
def test_neighbourhood_is_ball(w, h, n, data):
    b = box_z2(w, h) if w * h >= 2 else box_z2(2, 1)
    x = data.draw(st.sampled_from(b.sites))
    ball = neighborhood(b, [x], n)
    assert ball == {y for y in b.sites if distance(b, [x], [y]) <= n}
    assert boundary(b, [x]) == neighborhood(b, [x], 1) - {x}
