import math

import pytest

from homlab.decay import (BoxGeometry, DecayInstance, DiagonalChannelGeometry, StripGeometry,
                          WallChannelGeometry, barbell_channel, diagonal_channel, fit_rate,
                          instance_tv, measure_decay, wall_channel)
from homlab.gibbs import hardcore, phi_lambda, uniform
from homlab.graphs import box_z2, counterexample_abcd, distance, h_q, hard_core, star
from homlab.homspace import extend, is_globally_admissible
from homlab.spectral import ssm_rate_cap


def test_fit_rate_exact_exponential():
    d = [1, 2, 3, 4]
    rate, resid = fit_rate(d, [0.5 * math.exp(-0.7 * x) for x in d])
    assert rate == pytest.approx(0.7) and resid == pytest.approx(0.0, abs=1e-12)


def test_fit_rate_needs_three_nonzero_points():
    assert fit_rate([1, 2, 3], [0.1, 0.0, 1e-20]) == (None, None)


def test_fit_rate_flat_is_zero():
    rate, _ = fit_rate([2, 4, 6], [1.0, 1.0, 1.0])
    assert rate == 0.0


def test_identical_boundaries_give_zero():
    H = hard_core()
    b = box_z2(4, 3)
    A = frozenset(b.at(x, y) for x in (1, 2) for y in range(3))
    base = {b.at(0, y): "0" for y in range(3)}
    var = {b.at(3, y): "0" for y in range(3)}
    inst = DecayInstance(b, A, (b.at(1, 1),), [base], [var, dict(var)], 2)
    assert instance_tv(hardcore(1.0), inst) == 0.0


def test_measure_decay_rejects_non_increasing_distances():
    with pytest.raises(ValueError):
        measure_decay(hardcore(0.0), StripGeometry(hard_core()), [3, 3, 4])


def test_hard_core_strip_decays():
    rep = measure_decay(hardcore(math.log(0.5)), StripGeometry(hard_core()), range(1, 8))
    assert rep.mode == "SSM"
    assert rep.distances == sorted(set(rep.distances))
    assert all(0.0 <= t <= 1.0 for t in rep.tv_values)
    assert all(a > b for a, b in zip(rep.tv_values, rep.tv_values[1:]))
    assert rep.fitted_rate > 0.2


def test_hard_core_box_wsm_decays():
    rep = measure_decay(hardcore(math.log(0.5)), BoxGeometry(hard_core()), [1, 2, 3])
    assert rep.mode == "WSM" and rep.fitted_rate > 0.2


def test_strip_distance_is_probe_to_varying_column():
    inst = StripGeometry(hard_core()).build(5)
    right = [s for s in inst.board.sites if inst.board.coords[s][0] == 6]
    assert inst.distance == distance(inst.board, inst.B, right) == 5


def test_diagonal_channel_cylinders():
    H = counterexample_abcd()
    for n in range(3, 10):
        c = diagonal_channel(n)
        b, sig = c["board"], c["sigma"]
        assert is_globally_admissible(b, H, {**sig, c["x_l"]: "b"})
        assert is_globally_admissible(b, H, {**sig, c["x_r"]: "c"})
        assert extend(b, H, {**sig, c["x_l"]: "b", c["x_r"]: "c"}) is None
        # the walls leave only b or c at every channel site
        for s in c["A"]:
            free = set(H.vertices)
            for t in b.neighbors(s):
                if t in sig:
                    free &= H.neighbors(sig[t])
            assert free == {"b", "c"}


def test_diagonal_channel_tv_is_one():
    H = counterexample_abcd()
    rep = measure_decay(uniform(H), DiagonalChannelGeometry(H), range(3, 10))
    assert rep.tv_values == [1.0] * 7
    assert rep.fitted_rate == pytest.approx(0.0, abs=1e-12)


def test_diagonal_channel_rejects_zero():
    with pytest.raises(ValueError):
        diagonal_channel(0)


def test_barbell_channel_parity():
    from homlab.reproduce import looped_tree_with_barbell
    H = looped_tree_with_barbell()
    for d in range(1, 9):
        c = barbell_channel(d)
        joint = extend(c["board"], H, {**c["sigma"], **c["alpha"], **c["beta"]})
        assert (joint is None) == (d % 2 == 0)


@pytest.mark.parametrize("q", [3, 4, 5])
def test_wall_channel_rate_below_cap(q):
    H = h_q(q)
    rep = measure_decay(uniform(H), WallChannelGeometry(H), range(1, 8))
    assert rep.fitted_rate is not None
    assert rep.fitted_rate <= ssm_rate_cap(q) + 0.05
    c = wall_channel(3)
    walls = {c["sigma"][t] for t in c["board"].neighbors(c["probe"])
             if t in c["sigma"] and t != c["board"].at(0, 1)}
    assert walls == {"0", "b"}


def test_phi_lambda_decay_tv_non_increasing_in_lambda():
    S = star(2, center_loop=True)
    geom = StripGeometry(S, height=2)
    reps = [measure_decay(phi_lambda(S, "0", lam), geom, [1, 2, 3]) for lam in (1.5, 10.0, 100.0)]
    for i in range(3):
        tvs = [r.tv_values[i] for r in reps]
        assert all(x >= y - 1e-12 for x, y in zip(tvs, tvs[1:]))
