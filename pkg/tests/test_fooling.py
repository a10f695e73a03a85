import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from derand.errors import CapExceeded, ParameterError
from derand.fooling import (
    DiscreteDistribution,
    UniformSource,
    fooling_decomposition,
    invariance_gap,
    kolmogorov,
    lipschitz_fooling_error,
    pushforward,
    tail_bound_audit,
    wasserstein1,
    zeta,
)
from derand.polynomials import MultilinearPolynomial, cube_points, random_polynomial
from derand.pseudorandom import HashingGenerator

D = DiscreteDistribution


def _law(dist):
    return dict(zip(dist.support.tolist(), dist.weights.tolist()))


def test_pushforward_examples():
    assert _law(pushforward(MultilinearPolynomial({(1,): 1}), 2)) == {-1.0: 0.5, 1.0: 0.5}
    assert _law(pushforward(MultilinearPolynomial({(1, 2): 1}), 2)) == {-1.0: 0.5, 1.0: 0.5}
    assert _law(pushforward(MultilinearPolynomial({(1,): 1, (2,): 1}), 2)) == {-2.0: 0.25, 0.0: 0.5, 2.0: 0.25}


def test_pushforward_cap_and_sampler():
    P = MultilinearPolynomial({(1,): 1})
    with pytest.raises(CapExceeded):
        pushforward(P, 30)
    est = pushforward(P, 30, samples=500, random_state=0)
    assert not est.exact and est.sample_count == 500
    with pytest.raises(ParameterError):
        pushforward(P, lambda rng: rng.choice([-1, 1], size=2))


def test_distribution_validation():
    with pytest.raises(ParameterError):
        D([0, 1], [0.5, 0.6])
    with pytest.raises(ParameterError):
        D([0, 1], [1.5, -0.5])
    merged = D([0.0, 1e-15, 1.0], [0.25, 0.25, 0.5])
    assert len(merged) == 2


def test_w1_examples():
    a = D.from_values([0.0, 1.0, 3.0])
    assert wasserstein1(a, a) == 0
    assert wasserstein1(D.point_mass(0), D.point_mass(1)) == 1
    assert wasserstein1(D.from_values([-1, 1]), D.point_mass(0)) == 1


def test_kolmogorov_examples():
    assert kolmogorov(D.point_mass(0), D.point_mass(0)) == 0
    assert kolmogorov(D.point_mass(0), D.point_mass(1)) == 1
    assert kolmogorov(D.from_values([-1, 1]), D.from_values([-1, 0, 1])) == pytest.approx(1 / 6, abs=1e-15)


def test_w1_matches_scipy():
    from scipy.stats import wasserstein_distance

    rng = np.random.default_rng(0)
    for _ in range(20):
        x, y = rng.normal(size=7), rng.normal(size=5)
        wx, wy = rng.random(7), rng.random(5)
        ours = wasserstein1(D.from_values(x, wx), D.from_values(y, wy))
        assert ours == pytest.approx(wasserstein_distance(x, y, wx, wy), abs=1e-12)


_laws = st.lists(
    st.tuples(st.integers(-5, 5), st.integers(1, 5)), min_size=1, max_size=5
).map(lambda pairs: D.from_values([p[0] for p in pairs], [p[1] for p in pairs]))


@settings(max_examples=60, deadline=None)
@given(_laws, _laws, _laws)
def test_metric_properties(A, B, C):
    for dist in (wasserstein1, kolmogorov):
        assert dist(A, B) == pytest.approx(dist(B, A), abs=1e-12)
        assert dist(A, A) == 0
        assert dist(A, C) <= dist(A, B) + dist(B, C) + 1e-12
    assert kolmogorov(A, B) <= 1 + 1e-12
    grid = np.union1d(A.support, B.support)
    assert wasserstein1(A, B) <= grid[-1] - grid[0] + 1e-12
    if wasserstein1(A, B) == 0:
        assert np.array_equal(A.support, B.support)


def test_uniform_source_is_not_fooled():
    P = random_polynomial(6, 2, 6, random_state=0)
    assert lipschitz_fooling_error(P, UniformSource(6, 2))["w1"] == 0


def test_fooling_error_scale_and_errors():
    gen = HashingGenerator(8, 1, 0.5, t=2, k_h=2)
    P = random_polynomial(8, 1, 5, random_state=1)
    base = lipschitz_fooling_error(P, gen)
    big = lipschitz_fooling_error(P.scaled(2), gen)
    assert big["scale"] == pytest.approx(2) and big["w1"] == pytest.approx(base["w1"], abs=1e-12)
    with pytest.raises(ParameterError):
        lipschitz_fooling_error(random_polynomial(8, 2, 5, random_state=0), gen)
    with pytest.raises(ParameterError):
        lipschitz_fooling_error(P, gen, mode="mc")


def test_fooling_error_equals_half_unnormalized():
    gen = HashingGenerator(8, 1, 0.5, t=2, k_h=2)
    P = random_polynomial(8, 1, 5, random_state=2).scaled(2)
    law = gen.output_law()
    vals = P.evaluate(cube_points(8))
    unnorm = wasserstein1(D.from_values(vals), D.from_values(vals, law))
    assert lipschitz_fooling_error(P, gen)["w1"] == pytest.approx(unnorm / 2, abs=1e-12)


def test_monte_carlo_mode_reports_ci():
    gen = HashingGenerator(8, 1, 0.5, t=2, k_h=2)
    P = random_polynomial(8, 1, 5, random_state=3)
    out = lipschitz_fooling_error(P, gen, mode="mc", samples=400, random_state=0)
    assert not out["exact"] and out["samples"] == 400
    lo, hi = out["ci99"]
    assert lo <= out["w1"] <= hi


@pytest.mark.parametrize("seed", range(3))
def test_decomposition_inequalities(seed):
    gen = HashingGenerator(8, 1, 0.5, t=2, k_h=2)
    P = random_polynomial(8, 1, 6, random_state=seed)
    dec = fooling_decomposition(P, gen)
    assert dec["w1"] == pytest.approx(lipschitz_fooling_error(P, gen)["w1"], abs=1e-12)
    assert dec["triangle_ok"] and dec["per_hash_ok"]
    assert dec["pruning"] <= dec["pruning_bound"] + 1e-12
    assert dec["bad_weight_avg"] <= dec["bad_weight_bound"] + 1e-12


def test_tail_examples():
    assert tail_bound_audit(2, 4, 1.0)["ok"]
    out = tail_bound_audit(2, 4, 2)
    assert out["rhs"] == pytest.approx(0.5)
    assert out["ok"] and out["exact"]
    out = tail_bound_audit(4, 8, 3)
    assert out["rhs"] == pytest.approx(16 / 81) and out["ok"]
    with pytest.raises(ParameterError):
        tail_bound_audit(3, 8, 2)


def test_tail_lhs_by_hand():
    # 2-wise source of length 4: |sum| >= 4 needs all four signs equal.
    from derand.pseudorandom import KWiseSource

    out = KWiseSource(4, 2).all_outputs()
    expected = np.mean(np.abs(out.sum(axis=1)) >= 4)
    assert tail_bound_audit(2, 4, 2)["lhs"] == expected


def test_tail_sampled():
    out = tail_bound_audit(4, 16, 2, exact=False, trials=2000, random_state=0)
    assert not out["exact"] and out["samples"] == 2000
    assert out["ci99"][0] <= out["lhs"] <= out["ci99"][1]


def test_zeta():
    assert zeta(0.5) == 0
    assert zeta(-2) == 4
    assert zeta(3) == 4
    assert np.array_equal(zeta([0, 1, -1]), [0, 0, 1])


def test_invariance_gap_examples():
    assert invariance_gap(MultilinearPolynomial({(): 2}), 4, 1)["gap"] == 0
    half = MultilinearPolynomial({(): 0.5, (1,): 0.25, (2,): 0.25})
    assert invariance_gap(half, 4, 1)["gap"] == 0
    P = MultilinearPolynomial({(1,): 0.7, (5,): -0.4, (16,): 0.3})
    out = invariance_gap(P, 4, 1)
    assert out["exact"] and out["gap"] < 1e-12
    with pytest.raises(ParameterError):
        invariance_gap(MultilinearPolynomial({(17,): 1}), 4, 1)


def test_invariance_gap_quadratic_needs_degree():
    # A degree-2 test is fooled exactly once the code is 4-wise independent.
    P = MultilinearPolynomial({(1, 2): 1.0, (): 0.2})
    assert math.isfinite(invariance_gap(P, 3, 1)["gap"])
    assert invariance_gap(P, 3, 2)["gap"] < 1e-12
