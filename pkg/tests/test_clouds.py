import itertools
import warnings
from types import SimpleNamespace

import numpy as np
import pytest

from derand.clouds import (
    LiftedSolution,
    NotNearlyOrthogonal,
    balance_value,
    cloud_gram_eigen_bound,
    cloud_inner_matrix,
    cloud_inner_product,
    cloud_perturbation,
    clouds_of,
    lifted_gram,
    matching_audit,
    matching_report,
    near_orthogonal_fraction,
    near_orthogonality,
    orbit_members,
    perturbation_bound,
    realize,
    sdp_objective,
    signed,
)
from derand.codes import RMCode
from derand.errors import ParameterError
from derand.shortcode import ShortCodeGraph, affine_shift, build_short_code_graph, fold


@pytest.fixture(scope="module")
def folded42():
    return fold(build_short_code_graph(4, 2, 0.1))


def _good_words(n, d):
    words = RMCode(n, d).codewords()
    return words[near_orthogonality(words)["ok"]]


def test_near_orthogonality_examples():
    for const in (np.zeros(16, np.uint8), np.ones(16, np.uint8)):
        rep = near_orthogonality(const)
        assert rep["max_corr"] == 16 and not rep["ok"]
    v = _good_words(4, 2)[0]
    rep = near_orthogonality(v)
    assert rep["ok"] and rep["max_corr"] < 16


def test_near_orthogonal_fraction_values():
    assert near_orthogonal_fraction(4, 2) == pytest.approx(0.4375)
    assert near_orthogonal_fraction(3, 1) == 0


def test_orbit_members_distinct():
    v = RMCode(4, 2).encode(0b10110100111)
    members = orbit_members(v)
    assert len({m.tobytes() for m in members}) == len(members)
    assert 16 % len(members) == 0
    assert len(orbit_members(np.ones(16, np.uint8))) == 1


def test_cloud_eigenvalue():
    single = cloud_gram_eigen_bound(np.zeros(16, np.uint8), require_near_orthogonal=False)
    assert single["eigenvalue"] == pytest.approx(1) and single["members"] == 1
    for v in _good_words(4, 2)[::37]:
        rep = cloud_gram_eigen_bound(v)
        assert rep["ok"] and rep["eigenvalue"] <= 9 / 8
        assert rep["gershgorin"] >= rep["eigenvalue"] - 1e-12
    with pytest.raises(ParameterError):
        cloud_gram_eigen_bound(np.zeros(16, np.uint8))


def test_matching_examples():
    words = RMCode(3, 1).codewords()
    for v in words:
        assert matching_audit(v, v)
        assert matching_audit(np.zeros(8, np.uint8), v)
    for u, v in itertools.product(words, repeat=2):
        assert matching_report(u, v)["passed"]


def test_matching_random_pairs_rm42():
    words = RMCode(4, 2).codewords()
    rng = np.random.default_rng(0)
    for i, j in rng.integers(0, len(words), size=(30, 2)):
        assert matching_audit(words[i], words[j])


def _materialized(u, v):
    # Explicit sums of third tensor powers over the distinct shifts of u and v.
    a, b = _cloud_sum(u), _cloud_sum(v)
    return a @ b / np.sqrt((a @ a) * (b @ b))


def _cloud_sum(w):
    total = np.zeros(len(w) ** 3)
    for m in orbit_members(w):
        s = signed(m) / np.sqrt(len(w))
        total += np.einsum("i,j,k->ijk", s, s, s).ravel()
    return total


def test_inner_product_matches_materialized_tensors():
    words = RMCode(2, 2).codewords()
    keep = np.array([np.linalg.norm(_cloud_sum(w)) > 1e-9 for w in words])
    assert 0 < keep.sum() < len(words)
    live = words[keep]
    M = cloud_inner_matrix(live, live, 1)
    for i, j in itertools.product(range(len(live)), repeat=2):
        assert M[i, j] == pytest.approx(_materialized(live[i], live[j]), abs=1e-10)
    # a word whose orbit contains its complement has a zero cloud sum
    with pytest.raises(ParameterError):
        cloud_inner_matrix(words[~keep][:1], live, 1)


def test_inner_product_examples():
    zero, ones = np.zeros(8, np.uint8), np.ones(8, np.uint8)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotNearlyOrthogonal)
        assert cloud_inner_product(zero, zero, 1) == pytest.approx(1)
        for t in (1, 3, 5):
            assert cloud_inner_product(zero, ones, t) == pytest.approx(-1)
    with pytest.warns(NotNearlyOrthogonal):
        cloud_inner_product(zero, ones, 1)
    with pytest.raises(ParameterError):
        cloud_inner_matrix(zero, ones, 2)


def test_inner_product_symmetry_and_invariance():
    rng = np.random.default_rng(1)
    good = _good_words(4, 2)
    picks = good[rng.integers(0, len(good), size=12)]
    for t in (1, 3):
        M = cloud_inner_matrix(picks, picks, t)
        assert np.allclose(M, M.T, atol=1e-12)
        assert np.all(np.abs(M) <= 1 + 1e-12)
        shifted = affine_shift(picks, 5)
        assert np.allclose(cloud_inner_matrix(shifted, picks, t), M, atol=1e-12)


def test_perturbation():
    assert perturbation_bound(3, 2) == pytest.approx(40 * np.exp(-3 / 32))
    assert cloud_perturbation(3, 2) == (1.0, True)
    vals = [perturbation_bound(t, 2) for t in (1, 3, 5, 101, 1001)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert cloud_perturbation(3001, 2)[1] is False


def test_lifted_gram_structure(folded42):
    clouds = clouds_of(folded42)
    raw = lifted_gram(clouds, 3, 2, delta_override=0.0)
    good = raw.good
    C = cloud_inner_matrix(clouds[good], clouds[good], 3)
    assert np.allclose(raw.gram[np.ix_(good, good)], C, atol=1e-12)
    sol = lifted_gram(clouds, 3, 2, delta_override=0.25)
    off = np.outer(good, good) & ~np.eye(len(clouds), dtype=bool)
    assert np.all(np.diag(sol.gram) == 1)
    assert np.allclose(sol.gram[off], 0.75 * raw.gram[off])
    # bad clouds share the vector of the first good cloud
    bad = np.flatnonzero(~good)
    assert np.allclose(raw.gram[np.ix_(bad, bad)], 1)
    assert np.allclose(raw.gram[bad, raw.base_cloud], 1)
    default = lifted_gram(clouds, 3, 2)
    assert default.vacuous and default.delta == 1.0


@pytest.mark.parametrize("t", [1, 3])
def test_lifted_gram_psd(folded42, t):
    for delta in (None, 0.0, 0.1):
        sol = lifted_gram(clouds_of(folded42), t, 2, delta_override=delta)
        assert sol.min_eigenvalue >= -1e-8


def test_lifted_gram_needs_a_good_cloud():
    with pytest.raises(ParameterError):
        lifted_gram(RMCode(3, 1).codewords(), 1, 2)


def test_identical_clouds():
    v = _good_words(4, 2)[0]
    sol = lifted_gram(np.stack([v, v]), 3, 2, delta_override=0.2)
    assert sol.gram[0, 1] == pytest.approx(0.8)


def test_realized_vectors_match_gram(folded42):
    sol = lifted_gram(clouds_of(folded42), 3, 2, delta_override=0.1)
    X = realize(sol)
    assert np.allclose(X @ X.T, sol.gram, atol=1e-10)
    pi, W = folded42.stationary, folded42.weights
    sq = ((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=-1) / 4
    assert balance_value(sol, folded42) == pytest.approx(pi @ sq @ pi, abs=1e-8)
    assert sdp_objective(sol, folded42) == pytest.approx((W * sq).sum(), abs=1e-8)


def _toy(gram, pi):
    pi = np.asarray(pi, float)
    sol = LiftedSolution(3, 2, 0.0, 0.0, False, np.asarray(gram, float), np.ones(len(pi), bool), 0, 0.0, False)
    return sol, SimpleNamespace(stationary=pi, weights=np.outer(pi, pi), n_vertices=len(pi))


def test_balance_examples():
    sol, folded = _toy(np.ones((3, 3)), [0.2, 0.3, 0.5])
    assert balance_value(sol, folded) == 0
    sol, folded = _toy(np.eye(4), [0.25] * 4)
    # (1 - sum pi^2) / 2: tends to 1/2 as the clouds spread out
    assert balance_value(sol, folded) == pytest.approx(0.375)
    assert sdp_objective(sol, folded) == pytest.approx(0.375)
    with pytest.raises(ParameterError):
        balance_value(sol, SimpleNamespace(stationary=np.ones(2) / 2, weights=np.eye(2) / 2, n_vertices=2))


def test_objective_zero_on_identity_graph():
    folded = fold(ShortCodeGraph.identity(4, 2))
    sol = lifted_gram(clouds_of(folded), 3, 2, delta_override=0.0)
    assert sdp_objective(sol, folded) == pytest.approx(0, abs=1e-15)
