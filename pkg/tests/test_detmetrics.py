import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adjviz.detmetrics import cllr, det_curve, eer, min_cllr, pav_calibrate, pav_rank_groups
from adjviz.errors import MissingLabel, SingleClass
from adjviz.score_io import LabelMap

from oracles import brute_min_cllr, error_rates


def _split(tar, non):
    s = np.concatenate([tar, non]).astype(float)
    m = np.r_[np.ones(len(tar), bool), np.zeros(len(non), bool)]
    return s, m


def test_det_perfect_separation():
    c = det_curve(*_split([2, 3], [0, 1]))
    assert any(pm == 0 and pf == 0 for pm, pf in c.points())
    assert eer(c) == 0.0


def test_det_single_tied_pair():
    c = det_curve(*_split([1], [1]))
    k = int(np.flatnonzero(c.thresholds == 1.0)[0])
    assert (c.p_miss[k], c.p_fa[k]) == (0.0, 1.0)


def test_det_endpoints_and_monotone(rng):
    s, m = _split(rng.standard_normal(40), rng.standard_normal(60) - 1)
    c = det_curve(s, m)
    assert (c.p_miss[0], c.p_fa[0]) == (0.0, 1.0)
    assert (c.p_miss[-1], c.p_fa[-1]) == (1.0, 0.0)
    assert np.all(np.diff(c.p_miss) >= 0) and np.all(np.diff(c.p_fa) <= 0)


def test_det_matches_loop_counts(rng):
    s, m = _split(np.round(rng.standard_normal(30), 1), np.round(rng.standard_normal(25), 1))
    c = det_curve(s, m)
    ref = error_rates(s.tolist(), m.tolist())
    np.testing.assert_array_equal(c.thresholds, [r[0] for r in ref])
    np.testing.assert_array_equal(c.p_miss, [r[1] for r in ref])
    np.testing.assert_array_equal(c.p_fa, [r[2] for r in ref])


def test_eer_identical_multisets(rng):
    # p_fa = 1 - p_miss at every threshold, so the curves cross at 0.5
    v = rng.standard_normal(17)
    assert eer(det_curve(*_split(v, v))) == 0.5
    assert eer(det_curve(*_split([1, 2], [1, 2]))) == 0.5


def test_eer_interleaved():
    # thresholds 1,2,3,4,inf give (p_miss, p_fa): (0,1) (.5,1) (.5,.5) (1,.5) (1,0)
    assert eer(det_curve(*_split([1, 3], [2, 4]))) == 0.5


def test_eer_interpolates():
    # thresholds 0,1,2,3,inf: (0,1) (0,2/3) (0,1/3) (1/2,0) (1,0); the sign
    # change is on segment (0,1/3)-(1/2,0): t/2 = 1/3 - t/3 -> t = 2/5, eer = 1/5
    assert eer(det_curve(*_split([2, 3], [0, 1, 2]))) == pytest.approx(0.2, abs=1e-15)


def test_eer_monotone_invariance(rng):
    s, m = _split(rng.standard_normal(50) + 1, rng.standard_normal(70))
    assert eer(det_curve(np.exp(s), m)) == eer(det_curve(s, m))


def test_cllr_anchors():
    s, m = _split([0.0, 0.0], [0.0, 0.0, 0.0])
    assert cllr(s, m) == 1.0
    assert cllr(*_split([50.0], [-50.0])) < 1e-10
    got = cllr(*_split([math.log(3)], [math.log(1 / 3)]))
    assert got == pytest.approx(math.log2(4 / 3), abs=1e-15)


def test_cllr_extreme_values_finite():
    v = cllr(*_split([-1e6, 1e6], [1e6]))
    assert math.isfinite(v) and v > 1e5


def test_labels_via_labelmap():
    L = LabelMap({"a": "target", "b": "nontarget", "c": "nontarget"})
    assert cllr([0, 0, 0], L, ["a", "b", "c"]) == 1.0
    with pytest.raises(MissingLabel):
        cllr([0, 0], L, ["a", "z"])
    with pytest.raises(SingleClass):
        det_curve([1.0, 2.0], [True, True])


def test_min_cllr_separable():
    assert min_cllr(*_split([2, 3, 4], [0, 1])) < 1e-6


@pytest.mark.parametrize("seed", range(60))
def test_min_cllr_matches_exhaustive_oracle(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(2, 9))
    s = np.round(r.standard_normal(n), 1)
    m = np.zeros(n, bool)
    m[r.choice(n, size=int(r.integers(1, n)), replace=False)] = True
    got = min_cllr(s, m)
    assert got == pytest.approx(brute_min_cllr(s, m), abs=1e-9)
    assert got <= cllr(s, m) + 1e-12


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(-20, 20), st.booleans()), min_size=2, max_size=50))
def test_min_cllr_bounded_by_cllr(rows):
    s = np.array([r[0] for r in rows])
    m = np.array([r[1] for r in rows])
    if m.all() or not m.any():
        return
    lo, hi = min_cllr(s, m), cllr(s, m)
    assert 0 <= lo <= hi + 1e-12


def test_pav_calibration_monotone(rng):
    s, m = _split(rng.standard_normal(80) + 1, rng.standard_normal(120))
    cal = pav_calibrate(s, m)
    order = np.argsort(s, kind="stable")
    assert np.all(np.diff(cal.llr[order]) >= 0)
    assert np.all(np.diff(cal.block[order]) >= 0)
    assert cal.n_blocks <= s.size


def test_pav_groups_separable():
    trials = ["a", "b", "c", "d"]
    G = pav_rank_groups([0.1, 0.2, 0.8, 0.9], [False, False, True, True], trials)
    assert G.groups == {"a": "0", "b": "0", "c": "1", "d": "1"}


def test_pav_groups_single_violator():
    G = pav_rank_groups([1.0, 2.0], [True, False], ["x", "y"])
    assert len(set(G.groups.values())) == 1


@pytest.mark.parametrize("label", [True, False])
def test_pav_groups_constant_labels_one_block(label):
    G = pav_rank_groups([1.0, 2.0, 3.0], [label] * 3, ["x", "y", "z"])
    assert len(set(G.groups.values())) == 1


def test_pav_groups_fully_pooled_mixed_labels():
    G = pav_rank_groups([1.0, 2.0, 3.0], [True, False, False], ["x", "y", "z"])
    assert len(set(G.groups.values())) == 1


def test_pav_groups_ids_sort_in_score_order(rng):
    s = rng.standard_normal(300)
    m = rng.uniform(size=300) < 1 / (1 + np.exp(-3 * s))
    trials = [f"t{i}" for i in range(300)]
    G = pav_rank_groups(s, m, trials)
    ids = [G.groups[trials[k]] for k in np.argsort(s)]
    assert ids == sorted(ids)
    assert len(set(ids)) > 2
