import pytest
from hypothesis import given, settings

from homlab.folds import (DismantleCertificate, FoldStep, StuckReport, dismantle,
                          exhaustive_dismantle, find_folds, is_dismantlable, persistent_vertices,
                          replay)
from homlab.graphs import build_constraint_graph, generate_named

from oracles import dismantlable_oracle
from strategies import constraint_graphs


def test_hard_core_fold():
    assert ("1", "0") in find_folds(generate_named("H_phi"))


def test_unlooped_edge_has_no_folds():
    assert find_folds(generate_named("K_n", {"n": 2})) == []


def test_counterexample_fold_d_into_a():
    assert ("d", "a") in find_folds(generate_named("counterexample_abcd"))


def test_counterexample_certificate():
    cert = dismantle(generate_named("counterexample_abcd"))
    assert cert.steps == (FoldStep("d", "a"), FoldStep("b", "a"), FoldStep("c", "a"))
    assert cert.terminal == "a" and cert.terminal_looped


def test_barbell_not_dismantlable():
    res = dismantle(generate_named("barbell_n", {"n": 1}))
    assert isinstance(res, StuckReport) and res.exhaustive_confirmed


@pytest.mark.parametrize("q", [1, 2, 3, 5, 8])
def test_looped_complete_graphs(q):
    cert = dismantle(generate_named("K_n_looped", {"n": q}))
    assert len(cert.steps) == q - 1 and replay(generate_named("K_n_looped", {"n": q}), cert)


@pytest.mark.parametrize("q", [1, 2, 3, 5, 13])
def test_h_q_dismantlable(q):
    H = generate_named("H_q", {"q": q})
    cert = dismantle(H)
    assert isinstance(cert, DismantleCertificate) and replay(H, cert)


def test_complete_graph_five_not_dismantlable():
    assert not is_dismantlable(generate_named("K_n", {"n": 5}))
    assert exhaustive_dismantle(generate_named("K_n", {"n": 5})) is None


def test_looped_path_is_dismantlable():
    H = build_constraint_graph("abc", [("a", "a"), ("b", "b"), ("a", "b"), ("b", "c")])
    assert is_dismantlable(H)


def test_persistent_vertices():
    assert persistent_vertices(generate_named("H_phi")) == {"0": True}
    assert persistent_vertices(generate_named("H_q", {"q": 3}))["a"] is True
    assert persistent_vertices(generate_named("K_n_looped", {"n": 3})) == {"1": True, "2": True, "3": True}


def test_persistent_vertices_rejects_non_dismantlable():
    with pytest.raises(ValueError):
        persistent_vertices(generate_named("K_n", {"n": 3}))


def test_replay_rejects_tampered_certificate():
    H = generate_named("counterexample_abcd")
    cert = dismantle(H)
    bad = DismantleCertificate((FoldStep("a", "d"),) + cert.steps[1:], cert.terminal, True)
    assert not replay(H, bad)


@settings(max_examples=150, deadline=None)
@given(constraint_graphs(max_vertices=6))
def test_dismantle_matches_oracle(H):
    res = dismantle(H)
    assert isinstance(res, DismantleCertificate) == dismantlable_oracle(H.vertices, H.edges)
    if isinstance(res, DismantleCertificate):
        assert replay(H, res)


@settings(max_examples=60, deadline=None)
@given(constraint_graphs(min_vertices=2, max_vertices=6))
def test_persistent_vertices_reach_terminal(H):
    if not is_dismantlable(H):
        return
    pv = persistent_vertices(H)
    assert set(pv) == set(H.loops())
    # the greedy terminal is always persistent when it is looped
    cert = dismantle(H)
    if cert.terminal_looped:
        assert pv[cert.terminal] is True


def test_greedy_dismantle_stuck_is_unconfirmed():
    from homlab.folds import greedy_dismantle
    res = greedy_dismantle(generate_named("K_n", {"n": 3}))
    assert isinstance(res, StuckReport) and not res.exhaustive_confirmed
    cert = greedy_dismantle(generate_named("H_phi"))
    assert isinstance(cert, DismantleCertificate) and replay(generate_named("H_phi"), cert)
