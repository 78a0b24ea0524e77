import itertools
import random

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from homlab.chordal import chordal_tree_decomposition, natural_linear_order, order_rank
from homlab.graphs import box_z2, complete, counterexample_abcd, hard_core, path_board, star
from homlab.homspace import check_TSSM
from homlab.umc import (M1Failure, PMapState, dominates, greedy_maximal,
                        improvable_at_fixed_point, maximal_configuration, p_map_level,
                        p_map_orbit, p_map_step, verify_M1, verify_M2)

from oracles import greatest_point, points
from strategies import constraint_graphs

HPHI = hard_core()
HPHI_ORDER = ("1", "0")
S2 = star(2, center_loop=True)


def natural(H):
    return natural_linear_order(H, chordal_tree_decomposition(H))


def test_natural_orders_of_examples():
    assert natural(HPHI) == HPHI_ORDER
    assert natural(S2)[-1] == "0"


# -- maximal configurations ------------------------------------------------------


def test_hard_core_greatest_point_all_zero():
    b = path_board(3)
    res = maximal_configuration(b, HPHI, HPHI_ORDER)
    assert res.omega_alpha == {"0": "0", "1": "0", "2": "0"} and res.stable
    pts = points(b, HPHI)
    assert len(pts) == 5
    assert all(dominates(HPHI_ORDER, res.omega_alpha, p) for p in pts)


def test_hard_core_forced_neighbours():
    res = maximal_configuration(path_board(3), HPHI, HPHI_ORDER, {"1": "1"})
    assert res.omega_alpha == {"0": "0", "1": "1", "2": "0"}


def test_k5_incomparable_maxima():
    H = complete(5)
    res = maximal_configuration(box_z2(2, 1), H, H.vertices)
    assert not res.stable
    a, b = res.incomparable_pair
    assert sorted([(a["0,0"], a["1,0"]), (b["0,0"], b["1,0"])]) == [("4", "5"), ("5", "4")]
    assert not dominates(H.vertices, a, b) and not dominates(H.vertices, b, a)


def test_inadmissible_alpha_rejected():
    with pytest.raises(ValueError):
        maximal_configuration(path_board(3), HPHI, HPHI_ORDER, {"0": "1", "1": "1"})


def test_bad_order_rejected():
    with pytest.raises(ValueError):
        maximal_configuration(path_board(3), HPHI, ("0",))


def test_greedy_is_maximal_single_site():
    b = box_z2(3, 3)
    res = maximal_configuration(b, S2, natural(S2), {b.at(1, 1): "1"})
    rank = order_rank(natural(S2))
    from homlab.homspace import extend
    for s, v in res.omega_alpha.items():
        if s == b.at(1, 1):
            continue
        for u in S2.vertices:
            if rank[u] > rank[v]:
                assert extend(b, S2, {**res.omega_alpha, s: u}) is None


# -- M1 / M2 --------------------------------------------------------------------


def test_verify_m1_hard_core_3x3():
    v = verify_M1(box_z2(3, 3), HPHI, HPHI_ORDER, max_shape_size=2)
    assert v.holds and v.shapes_checked == 1 + 9 + 36


def test_verify_m1_k5_fails():
    H = complete(5)
    v = verify_M1(box_z2(2, 1), H, H.vertices, max_shape_size=0)
    assert not v.holds
    a, b = v.counterexample["incomparable_pair"]
    assert not dominates(H.vertices, a, b) and not dominates(H.vertices, b, a)


def test_verify_m1_star_singletons():
    assert verify_M1(box_z2(2, 2), S2, natural(S2), max_shape_size=1).holds


def test_verify_m2_requires_m1():
    H = complete(5)
    with pytest.raises(M1Failure):
        verify_M2(box_z2(2, 1), H, H.vertices, 3, max_shape_size=0)


def test_m2_hard_core_path_centre():
    b = path_board(7)
    w1 = greedy_maximal(b, HPHI, HPHI_ORDER, {"3": "1"})
    w2 = greedy_maximal(b, HPHI, HPHI_ORDER, {"3": "0"})
    assert {s for s in b.sites if w1[s] != w2[s]} == {"3"}
    v = verify_M2(b, HPHI, HPHI_ORDER, 0, max_shape_size=1, sites=["3"])
    assert v.holds and v.measured_distance == 0


def test_m2_equal_alphas_trivial():
    v = verify_M2(path_board(3), HPHI, HPHI_ORDER, 0, max_shape_size=0)
    assert v.holds and v.measured_distance == 0


@pytest.mark.parametrize("H", [HPHI, S2, star(3, all_looped=True)], ids=["H_phi", "S2", "WR3"])
def test_m2_within_bound(H):
    v = verify_M2(box_z2(3, 2), H, natural(H), len(H) - 2, max_shape_size=2)
    assert v.holds and v.measured_distance <= len(H) - 2


def test_umc_implies_tssm_gap():
    b = box_z2(3, 2)
    order = natural(S2)
    m2 = verify_M2(b, S2, order, 1, max_shape_size=2)
    assert m2.holds
    assert check_TSSM(b, S2, 2 * m2.bound + 1, use_ssf=False).holds


def _decomposable(H):
    dec = chordal_tree_decomposition(H)
    return dec, (natural_linear_order(H, dec) if dec else None)


@settings(max_examples=40, deadline=None)
@given(constraint_graphs(1, 5))
def test_m1_against_greatest_point_oracle(H):
    dec, order = _decomposable(H)
    assume(dec is not None)
    b = box_z2(2, 2)
    pts = points(b, H)
    rank = order_rank(order)
    for s in b.sites:
        for v in H.vertices:
            if not any(p[s] == v for p in pts):
                continue
            top = greatest_point(pts, rank, {s: v})
            assert top is not None
            assert greedy_maximal(b, H, order, {s: v}) == top
    assert verify_M1(b, H, order, max_shape_size=2).holds


@settings(max_examples=30, deadline=None)
@given(constraint_graphs(1, 5))
def test_m2_distance_bound_random_decomposable(H):
    dec, order = _decomposable(H)
    assume(dec is not None and len(H) >= 2)
    v = verify_M2(path_board(5), H, order, len(H) - 2, max_shape_size=2)
    assert v.holds


@settings(max_examples=30, deadline=None)
@given(constraint_graphs(1, 5), st.randoms(use_true_random=False))
def test_monotone_restriction_and_order_independence(H, rnd):
    dec, order = _decomposable(H)
    assume(dec is not None)
    b = box_z2(3, 2)
    res = maximal_configuration(b, H, order, orderings=20, seed=rnd.randint(0, 99))
    assert res.stable
    alpha = {b.at(0, 0): rnd.choice(H.vertices), b.at(2, 1): rnd.choice(H.vertices)}
    from homlab.homspace import extend
    if extend(b, H, alpha) is None:
        return
    w_a = greedy_maximal(b, H, order, alpha)
    w_b = greedy_maximal(b, H, order, {b.at(0, 0): alpha[b.at(0, 0)]})
    assert dominates(order, w_b, w_a)
    assert dominates(order, res.omega_alpha, w_a)


# -- P-map ----------------------------------------------------------------------


def test_p_map_rejects_state_outside_d():
    b = path_board(3)
    w = {"0": "0", "1": "0", "2": "0"}
    with pytest.raises(ValueError):
        p_map_step(b, HPHI_ORDER, PMapState(w, w, "1"))


def test_p_map_fixed_point_hard_core():
    b = path_board(3)
    w1 = {"0": "0", "1": "1", "2": "0"}
    w2 = {"0": "0", "1": "0", "2": "0"}
    st_ = PMapState(w1, w2, "1")
    assert p_map_step(b, HPHI_ORDER, st_) == st_
    assert improvable_at_fixed_point(b, HPHI, HPHI_ORDER, st_) == "0"


def test_p_map_case_two_swaps():
    H = star(3, all_looped=True)
    order = ("1", "2", "3", "0")
    b = path_board(2)
    w1 = {"0": "2", "1": "3"}
    w2 = {"0": "1", "1": "0"}
    nxt = p_map_step(b, order, PMapState(w1, w2, "1"))
    assert nxt == PMapState(w2, w1, "0")
    assert p_map_level(order, nxt) < p_map_level(order, PMapState(w1, w2, "1"))


def test_case_1a_returns_cone_hub():
    order = natural(S2)
    dec = chordal_tree_decomposition(S2)
    b = path_board(3)
    lo, hi = order[0], order[1]
    st_ = PMapState({"0": "0", "1": lo, "2": "0"}, {"0": "0", "1": hi, "2": "0"}, "1")
    assert p_map_step(b, order, st_) == st_
    assert improvable_at_fixed_point(b, S2, order, st_, dec) == "0"


def test_non_decomposable_may_be_stuck():
    H = counterexample_abcd()
    order = ("c", "b", "a", "d")
    b = path_board(3)
    st_ = PMapState({"0": "d", "1": "b", "2": "a"}, {"0": "b", "1": "a", "2": "a"}, "1")
    assert p_map_step(b, order, st_) == st_
    assert improvable_at_fixed_point(b, H, order, st_) is None


def test_improvable_requires_fixed_point():
    H = star(3, all_looped=True)
    b = path_board(2)
    st_ = PMapState({"0": "2", "1": "3"}, {"0": "1", "1": "0"}, "1")
    with pytest.raises(ValueError):
        improvable_at_fixed_point(b, H, ("1", "2", "3", "0"), st_)


def _random_states(b, H, rank, rnd, n=25):
    pts = points(b, H)
    out = []
    for _ in range(n):
        w1, w2 = rnd.choice(pts), rnd.choice(pts)
        xs = [x for x in b.sites if rank[w1[x]] < rank[w2[x]]]
        if xs:
            out.append(PMapState(w1, w2, rnd.choice(xs)))
    return out


@settings(max_examples=30, deadline=None)
@given(constraint_graphs(2, 5), st.randoms(use_true_random=False))
def test_p_map_descends_within_h_minus_two(H, rnd):
    order = tuple(rnd.sample(H.vertices, len(H)))
    rank = order_rank(order)
    b = box_z2(3, 2)
    assume(points(b, H))
    for s in _random_states(b, H, rank, rnd):
        orbit = p_map_orbit(b, order, s)
        assert len(orbit) - 1 <= len(H) - 2
        levels = [p_map_level(order, t) for t in orbit]
        assert all(x > y for x, y in zip(levels, levels[1:]))
        fixed = orbit[-1]
        _, prec, succ = (None, [], [])
        assert p_map_step(b, order, fixed) == fixed


@settings(max_examples=30, deadline=None)
@given(constraint_graphs(2, 5), st.randoms(use_true_random=False))
def test_fixed_points_improvable_when_decomposable(H, rnd):
    dec, order = _decomposable(H)
    assume(dec is not None)
    rank = order_rank(order)
    b = box_z2(3, 2)
    for s in _random_states(b, H, rank, rnd):
        fixed = p_map_orbit(b, order, s)[-1]
        u = improvable_at_fixed_point(b, H, order, fixed, dec)
        assert u is not None and rank[u] > rank[fixed.omega_1[fixed.x]]
        new = {**fixed.omega_1, fixed.x: u}
        assert all(H.adjacent(new[p], new[q]) for p, q in b.edge_list())
