import math
import random

import pytest

from homlab import reproduce
from homlab.fuzz import classify, hierarchy_fuzz, ladder_violations, random_graph
from homlab.graphs import build_constraint_graph, complete, counterexample_abcd, hard_core


def test_fuzz_default_run_clean():
    rep = hierarchy_fuzz(200, 7, seed=0)
    assert rep.violations == [] and rep.exit_code == 0
    t = rep.tallies
    assert t["graphs"] == 200
    assert t["safe_symbol"] <= t["decomposable"] + t["decomposition_unknown"]
    assert t["decomposable"] <= t["dismantlable"]


def test_fuzz_is_seeded():
    a = hierarchy_fuzz(40, 6, seed=11).to_json()
    b = hierarchy_fuzz(40, 6, seed=11).to_json()
    assert a == b


def test_fuzz_panel():
    rep = hierarchy_fuzz(25, 4, seed=2, panel=True)
    assert rep.violations == []
    assert all("si_failure_found" in n for n in rep.notes)


def test_fuzz_rejects_zero_count():
    with pytest.raises(ValueError):
        hierarchy_fuzz(0)


def test_random_graph_sizes():
    rng = random.Random(0)
    for _ in range(50):
        assert 1 <= len(random_graph(rng, 5)) <= 5


def test_ladder_flags_broken_classification():
    c = classify(hard_core())
    assert ladder_violations(hard_core(), c) == []
    bad = type(c)(safe_symbol="0", decomposable=False, dismantlable=False, certificate_ok=False)
    assert len(ladder_violations(hard_core(), bad)) == 2


def test_classify_examples():
    c = classify(counterexample_abcd())
    assert (c.safe_symbol, c.decomposable, c.dismantlable) == (None, False, True)
    c = classify(complete(5))
    assert not c.dismantlable and c.certificate_ok


@pytest.mark.parametrize("example", reproduce.CATALOGUE)
def test_reproduce_each_passes(example):
    rep = reproduce.run(example)
    assert rep.passed and rep.exit_code == 0
    assert rep.to_json()["verdict"] == "PASS"
    assert all(rep.checks.values())


def test_reproduce_unknown_raises():
    with pytest.raises(ValueError):
        reproduce.run("figure-1")


def test_prop_9_4_large_q_below_threshold():
    rep = reproduce.prop_9_4(13)
    assert rep.passed and rep.checks["q_of_pi_below_p_c"]
    assert rep.details["spectral"].rate_cap == pytest.approx(math.log(12))


def test_prop_9_4_small_q_skips_threshold():
    assert "q_of_pi_below_p_c" not in reproduce.prop_9_4(4).checks


def test_figure_9_odd_separation_fails():
    # the barbell obstruction is parity based, so odd separations must not be reported empty
    assert not reproduce.figure_9(separations=[3]).passed


def test_looped_tree_with_barbell_shape():
    H = reproduce.looped_tree_with_barbell()
    assert [v for v in H.vertices if H.is_looped(v)] == ["0", "2"]
