import math

import numpy as np
import pytest

from derand._util import popcount
from derand.codes import RMCode
from derand.errors import ParameterError
from derand.graphs import balanced_separator_opt, conductance
from derand.shortcode import (
    ShortCodeGraph,
    affine_shift,
    build_short_code_graph,
    check_automorphisms,
    closed_form_eigenvalues,
    eigenvalue,
    fold,
    orbits,
    poisson_weights,
    shift_permutations,
    spectrum_audit,
)


@pytest.fixture(scope="module")
def g42():
    return build_short_code_graph(4, 2, 0.1)


@pytest.fixture(scope="module")
def g31():
    return build_short_code_graph(3, 1, 0.1)


def test_validation():
    with pytest.raises(ParameterError):
        build_short_code_graph(4, 2, 0.2)
    with pytest.raises(ParameterError):
        build_short_code_graph(4, 2, 0.0, strict=False)
    with pytest.raises(ParameterError):
        build_short_code_graph(4, 0, 0.05)
    g = build_short_code_graph(4, 2, 0.2, strict=False)
    assert g.meta["eps_in_range"] is False


def test_step_law_basics(g42):
    law = g42.step_law
    assert law.sum() == pytest.approx(1, abs=1e-12) and np.all(law >= 0)
    assert g42.m_max == math.ceil(16 * 0.1 * 4)
    assert np.allclose(g42.weights, g42.weights.T)
    assert g42.weights.sum() == pytest.approx(1)
    assert poisson_weights(0.2, 5).sum() == pytest.approx(1)


def test_eigenvalue_examples(g42):
    lam = np.asarray(g42.eigenvalues)
    assert lam[0] == pytest.approx(1, abs=1e-12)
    assert np.all(np.abs(lam) <= 1 + 1e-12)
    code = RMCode(4, 2)
    dual = RMCode(4, 1).codewords()
    alpha = np.zeros(16, np.uint8)
    alpha[[0, 5]] = 1
    for y in dual[:8]:
        assert eigenvalue(g42, y) == pytest.approx(1, abs=1e-12)
        assert eigenvalue(g42, alpha ^ y) == eigenvalue(g42, alpha)
    assert eigenvalue(g42, int(code.syndrome(alpha))) == eigenvalue(g42, alpha)


def test_eigenvalues_equal_character_sums(g42):
    code = g42.code
    words = code.codewords().astype(np.int64)
    leaders, _ = g42.coset_table
    reps = ((leaders[:, None] >> (15 - np.arange(16))[None, :]) & 1).astype(np.int64)
    chars = 1 - 2 * ((reps @ words.T) % 2)
    assert np.allclose(chars @ g42.step_law, g42.eigenvalues, atol=1e-12)


def test_closed_form_untruncated(g42):
    assert not g42.truncated
    assert np.allclose(g42.eigenvalues, closed_form_eigenvalues(4, 2, 0.1), atol=1e-9)


def test_walk_oracle(g42):
    steps = g42.sample_steps(10**6, random_state=0)
    for beta in (1, 5, 37, 1000, 2047):
        chi = 1 - 2 * (popcount(steps & beta) & 1)
        est = chi.mean()
        se = max(chi.std() / 1000, 1e-6)
        assert abs(est - eigenvalue(g42, beta)) <= 5 * se


def test_spectrum_audit(g42):
    rep = spectrum_audit(g42, 0.05)
    assert rep["low_degree_ok"] and rep["mean_inner_ok"] and not rep["degenerate"]
    assert len(rep["table"]) == g42.code.size
    assert rep["min_adjacent_inner_product"] == -16  # small d: sums of steps reach the all-ones word
    assert not rep["adjacency_ok"]


def test_identity_graph_audit():
    g = ShortCodeGraph.identity(4, 2)
    assert np.allclose(g.eigenvalues, 1)
    rep = spectrum_audit(g, 0.05)
    assert rep["degenerate"] and rep["low_degree_ok"]


def test_truncation_keeps_adjacency():
    g = build_short_code_graph(4, 4, 0.05)
    assert g.truncated
    rep = spectrum_audit(g, 0.05)
    assert rep["adjacency_ok"] and rep["min_adjacent_inner_product"] > 12
    forced = build_short_code_graph(4, 2, 0.1, truncate=True)
    assert forced.step_law[0] == 1.0


def test_serialization_roundtrip(g31):
    back = ShortCodeGraph.from_json(g31.to_json())
    assert np.array_equal(back.step_law, g31.step_law) and back.m_max == g31.m_max
    rows = g31.spectrum_rows()
    assert rows[0][1] == 0 and rows[0][2] == pytest.approx(1)


def test_affine_shift_examples():
    v = RMCode(3, 1).codewords()[6]
    assert np.array_equal(affine_shift(v, 0), v)
    assert np.array_equal(affine_shift(affine_shift(v, 5), 5), v)
    assert np.array_equal(affine_shift(v, [1, 0, 1]), affine_shift(v, 5))
    ones = np.ones(8, np.uint8)
    assert np.array_equal(affine_shift(ones, 3), ones)
    with pytest.raises(ParameterError):
        affine_shift(v, 8)


def test_shifts_preserve_code():
    perms = shift_permutations(4, 2)
    for p in perms:
        assert np.array_equal(np.sort(p), np.arange(len(p)))


@pytest.mark.parametrize("n,d,count", [(3, 1, 9), (4, 1, 17), (4, 2, 248)])
def test_orbits(n, d, count):
    orb = orbits(n, d)
    assert len(orb) == count
    assert orb.sizes.sum() == 2 ** RMCode(n, d).dimension
    assert all((2**n) % s == 0 for s in orb.sizes)
    # the two constants are singletons
    assert orb.sizes[orb.labels[0]] == 1
    assert orb.sizes[orb.labels[RMCode(n, d).message_of(np.ones(2**n, np.uint8))]] == 1


@pytest.mark.parametrize("n,d", [(3, 1), (4, 2)])
def test_automorphisms_exact(n, d):
    g = build_short_code_graph(n, d, 0.1)
    assert check_automorphisms(g)
    W = g.weights
    for p in shift_permutations(n, d)[:5]:
        assert np.array_equal(W[np.ix_(p, p)], W)


def test_fold_structure(g31):
    f = fold(g31)
    assert f.weights.sum() == pytest.approx(1, abs=1e-12)
    orb = f.orbits
    assert np.array_equal(f.stationary, orb.sizes / g31.n_vertices)
    # the law of the orbit of a uniform codeword
    assert np.array_equal(np.bincount(orb.labels) / len(orb.labels), f.stationary)
    ident = fold(ShortCodeGraph.identity(3, 1))
    assert np.count_nonzero(ident.weights - np.diag(np.diag(ident.weights))) == 0


def test_fold_against_projected_walk(g31):
    f = fold(g31)
    rng = np.random.default_rng(5)
    count = 200_000
    u = rng.integers(0, g31.n_vertices, size=count)
    v = u ^ g31.sample_steps(count, random_state=rng)
    lab = f.orbits.labels
    k = f.n_vertices
    freq = np.bincount(lab[u] * k + lab[v], minlength=k * k).reshape(k, k) / count
    se = np.sqrt(f.weights * (1 - f.weights) / count)
    assert np.all(np.abs(freq - f.weights) <= 5 * se + 1e-9)


def test_folded_conductance_equals_lift(g31):
    f = fold(g31)
    res = balanced_separator_opt(f, 0.25)
    assert res.exact
    assert conductance(g31, f.lift(res.witness)) == pytest.approx(res.phi, abs=1e-12)
    rng = np.random.default_rng(0)
    for _ in range(10):
        S = rng.random(f.n_vertices) < 0.5
        if S.any() and not S.all():
            assert conductance(g31, f.lift(S)) == pytest.approx(conductance(f, S), abs=1e-12)
