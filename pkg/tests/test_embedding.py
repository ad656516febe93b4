import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adjviz.adjacency import DistanceMatrix
from adjviz.embedding import (
    Embedding,
    classical_mds,
    isotonic_regression,
    nonmetric_mds,
    procrustes_align,
    procrustes_normalize,
    read_embedding,
    write_embedding,
)
from adjviz.errors import DimensionTooLarge, EmptyInput, NonPositiveWeight

from oracles import brute_isotonic, pairwise


def _dm(values):
    values = np.asarray(values, dtype=float)
    return DistanceMatrix([f"p{i}" for i in range(len(values))], values)


def _points_dm(points):
    return _dm(pairwise(points))


EQUILATERAL = 1.0 - np.eye(3)

# -- isotonic regression --


@pytest.mark.parametrize("y,expected", [
    ([1, 2, 3], [1, 2, 3]),
    ([3, 1, 2], [2, 2, 2]),
    ([2, 1], [1.5, 1.5]),
])
def test_isotonic_examples(y, expected):
    fit = isotonic_regression(y)
    np.testing.assert_allclose(fit.fitted, expected, atol=1e-12)
    np.testing.assert_allclose(brute_isotonic(y), expected, atol=1e-12)


def test_isotonic_weighted():
    fit = isotonic_regression([2.0, 1.0], [3.0, 1.0])
    np.testing.assert_allclose(fit.fitted, [1.75, 1.75])
    assert fit.blocks == ((0, 2),)


def test_isotonic_blocks_are_maximal_runs():
    fit = isotonic_regression([0, 0, 1, 1])
    assert fit.blocks == ((0, 2), (2, 4))


def test_isotonic_errors():
    with pytest.raises(EmptyInput):
        isotonic_regression([])
    with pytest.raises(NonPositiveWeight):
        isotonic_regression([1, 2], [1, 0])


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=7),
       st.lists(st.floats(0.1, 10), min_size=7, max_size=7))
def test_isotonic_matches_brute_force(y, w):
    w = w[: len(y)]
    fit = isotonic_regression(y, w)
    assert np.all(np.diff(fit.fitted) >= 0)
    ref = brute_isotonic(y, w)
    err = lambda f: float(np.dot(w, (np.asarray(y) - f) ** 2))
    assert err(fit.fitted) <= err(ref) + 1e-9 * (1 + err(ref))
    np.testing.assert_allclose(fit.fitted, ref, atol=1e-7)


# -- classical MDS --


def test_classical_two_points():
    E = classical_mds(_dm([[0, 2], [2, 0]]), dim=1)
    np.testing.assert_allclose(sorted(E.coords[:, 0]), [-1, 1], atol=1e-12)


def test_classical_equilateral():
    E = classical_mds(_dm(EQUILATERAL), dim=2)
    np.testing.assert_allclose(E.distances(), EQUILATERAL, atol=1e-9)


def test_classical_collinear():
    E = classical_mds(_points_dm([[0.0], [1.0], [2.0]]), dim=2)
    np.testing.assert_allclose(E.distances(), pairwise([[0.0], [1.0], [2.0]]), atol=1e-9)
    assert np.allclose(E.coords[:, 1], 0, atol=1e-7)


def test_classical_recovers_configuration(rng):
    for _ in range(10):
        P = rng.standard_normal((int(rng.integers(3, 21)), 2))
        E = classical_mds(_points_dm(P))
        assert np.abs(procrustes_align(E.coords, P) - P).max() < 1e-7
        assert np.allclose(E.coords.sum(axis=0), 0, atol=1e-9)


def test_classical_clamps_negative_spectrum():
    # violates the triangle inequality, so B has a negative eigenvalue
    D = _dm([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    E = classical_mds(D)
    assert 0 < E.clamped_mass < 1
    assert np.all(np.isfinite(E.coords))


def test_dimension_too_large():
    with pytest.raises(DimensionTooLarge):
        classical_mds(_dm(EQUILATERAL), dim=3)
    with pytest.raises(DimensionTooLarge):
        nonmetric_mds(_dm(EQUILATERAL), dim=0)


# -- non-metric MDS --


def test_nonmetric_euclidean_input(rng):
    P = rng.standard_normal((12, 2))
    E = nonmetric_mds(_points_dm(P))
    assert E.stress < 1e-6
    assert E.method == "nonmetric"


def test_nonmetric_equilateral():
    E = nonmetric_mds(_dm(EQUILATERAL))
    assert E.stress < 1e-6
    d = E.distances()[np.triu_indices(3, 1)]
    assert np.ptp(d) < 1e-6


@pytest.mark.parametrize("seed", [None, 0, 1, 2, 3])
def test_nonmetric_trace_non_increasing(rng, seed):
    n = 15
    D = _dm(squareform_random(rng, n))
    E = nonmetric_mds(D, seed=seed)
    t = np.asarray(E.trace)
    assert len(t) == E.iterations + 1
    assert np.all(np.diff(t) <= 0)
    assert E.stress == t[-1]
    assert np.allclose(E.coords.sum(axis=0), 0, atol=1e-9)


def squareform_random(rng, n):
    A = rng.uniform(size=(n, n))
    A = np.triu(A, 1)
    return A + A.T


def test_nonmetric_max_iter_is_not_error(rng):
    E = nonmetric_mds(_dm(squareform_random(rng, 10)), max_iter=3, eps=0.0, seed=5)
    assert E.iterations <= 3
    assert len(E.trace) == E.iterations + 1


def test_nonmetric_ties_are_free():
    # all dissimilarities tied: any configuration is a perfect ordinal fit
    D = _dm(1.0 - np.eye(5))
    E = nonmetric_mds(D, seed=1)
    assert E.stress < 1e-12


def test_nonmetric_deterministic(rng):
    D = _dm(squareform_random(rng, 9))
    a, b = nonmetric_mds(D), nonmetric_mds(D)
    assert a.coords.tobytes() == b.coords.tobytes()
    c, d = nonmetric_mds(D, seed=7), nonmetric_mds(D, seed=7)
    assert c.coords.tobytes() == d.coords.tobytes()


def test_nonmetric_all_zero_distances():
    E = nonmetric_mds(_dm(np.zeros((3, 3))))
    assert E.stress == 0 and not E.coords.any()


# -- normalization --


def _rot(theta):
    return np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])


def _emb(X):
    return Embedding([f"c{i}" for i in range(len(X))], X, "test", 0.0)


@pytest.mark.parametrize("seed", range(10))
def test_normalize_rigid_and_mirror_invariance(seed):
    r = np.random.default_rng(seed)
    X = r.standard_normal((8, 2)) * [3.0, 1.0]
    ref = procrustes_normalize(_emb(X)).coords
    moved = X @ _rot(r.uniform(0, 2 * np.pi)).T + r.standard_normal(2)
    np.testing.assert_allclose(procrustes_normalize(_emb(moved)).coords, ref, atol=1e-9)
    mirrored = X * [-1.0, 1.0]
    np.testing.assert_allclose(procrustes_normalize(_emb(mirrored)).coords, ref, atol=1e-9)


def test_normalize_idempotent(rng):
    once = procrustes_normalize(_emb(rng.standard_normal((6, 2)))).coords
    twice = procrustes_normalize(_emb(once)).coords
    np.testing.assert_allclose(twice, once, atol=1e-12)


def test_normalize_pose_rules(rng):
    Y = procrustes_normalize(_emb(rng.standard_normal((7, 2)))).coords
    np.testing.assert_allclose(Y.sum(axis=0), 0, atol=1e-12)
    assert Y[0, 0] >= 0 and Y[0, 1] >= 0
    cov = Y.T @ Y
    assert abs(cov[0, 1]) < 1e-9 and cov[0, 0] >= cov[1, 1]


def test_normalize_isotropic_cloud():
    X = classical_mds(_dm(EQUILATERAL)).coords
    ref = procrustes_normalize(_emb(X)).coords
    for theta in (0.3, 1.0, 2.5):
        got = procrustes_normalize(_emb(X @ _rot(theta).T)).coords
        np.testing.assert_allclose(got, ref, atol=1e-9)
    assert ref[0, 1] == pytest.approx(0, abs=1e-12) and ref[0, 0] > 0


# -- serialization --


def test_embedding_file(tmp_path, rng):
    E = procrustes_normalize(nonmetric_mds(_dm(squareform_random(rng, 5)), seed=3))
    write_embedding(E, tmp_path / "e.tsv")
    lines = (tmp_path / "e.tsv").read_text().splitlines()
    assert lines[0].startswith("# method=nonmetric stress=")
    assert "seed=3" in lines[0] and f"iterations={E.iterations}" in lines[0]
    assert len(lines) == 6 and all(len(ln.split("\t")) == 3 for ln in lines[1:])
    R = read_embedding(tmp_path / "e.tsv")
    assert R.classifier_ids == E.classifier_ids and R.seed == 3 and R.method == "nonmetric"
    np.testing.assert_allclose(R.coords, E.coords, rtol=1e-8, atol=1e-12)
