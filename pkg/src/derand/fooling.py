"""Measuring how well a source fools Lipschitz tests of a polynomial.

For laws on the real line the supremum of |E psi(A) - E psi(B)| over
1-Lipschitz psi equals the 1-Wasserstein distance, so the Lipschitz fooling
error of a generator is computed exactly as W1 between two pushforward laws.
"""

import math

import numpy as np

from ._util import as_rng, log2_cap
from .codes import RMCode
from .errors import CapExceeded, ParameterError
from .polynomials import cube_points, prune_h_bad
from .pseudorandom import KWiseSource

Z99 = 2.5758293035489004


class DiscreteDistribution:
    """Finite law on the real line: strictly increasing support, positive weights.

    Atoms closer than ``merge_tol`` (relative to max(1, |x|)) are merged so
    that values equal up to rounding form a single atom.
    """

    def __init__(self, support, weights, merge_tol=1e-12, exact=True, sample_count=None):
        x = np.asarray(support, dtype=float).ravel()
        w = np.asarray(weights, dtype=float).ravel()
        if x.shape != w.shape:
            raise ParameterError("support and weights differ in length")
        if np.any(w < 0):
            raise ParameterError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ParameterError(f"weights sum to {w.sum()!r}, not 1")
        keep = w > 0
        x, w = x[keep], w[keep]
        order = np.argsort(x, kind="stable")
        x, w = x[order], w[order]
        if len(x) > 1:
            gap = np.diff(x) > merge_tol * np.maximum(1.0, np.abs(x[1:]))
            group = np.concatenate([[0], np.cumsum(gap)])
            w = np.bincount(group, weights=w)
            x = x[np.concatenate([[True], gap])]
        self.support = x
        self.weights = w
        self.exact = exact
        self.sample_count = sample_count

    @classmethod
    def from_values(cls, values, weights=None, **kwargs):
        values = np.asarray(values, dtype=float).ravel()
        if weights is None:
            weights = np.full(len(values), 1.0 / len(values))
        else:
            weights = np.asarray(weights, dtype=float).ravel()
            weights = weights / weights.sum()
        return cls(values, weights, **kwargs)

    @classmethod
    def point_mass(cls, x):
        return cls([x], [1.0])

    def __repr__(self):
        return f"DiscreteDistribution({len(self.support)} atoms, exact={self.exact})"

    def __len__(self):
        return len(self.support)

    def mean(self):
        return float(self.support @ self.weights)

    def expect(self, fn):
        return float(np.asarray(fn(self.support), dtype=float) @ self.weights)

    def cdf(self, x):
        idx = np.searchsorted(self.support, x, side="right")
        cum = np.concatenate([[0.0], np.cumsum(self.weights)])
        return cum[idx]


def _merged_cdfs(A, B):
    grid = np.union1d(A.support, B.support)
    return grid, A.cdf(grid), B.cdf(grid)


def wasserstein1(A, B):
    """Area between the two CDFs, exact on the merged support."""
    grid, fa, fb = _merged_cdfs(A, B)
    if len(grid) < 2:
        return 0.0
    return float(np.sum(np.abs(fa[:-1] - fb[:-1]) * np.diff(grid)))


def kolmogorov(A, B):
    _, fa, fb = _merged_cdfs(A, B)
    return float(np.max(np.abs(fa - fb)))


class UniformSource:
    """The uniform cube viewed as a trivial generator (for baselines)."""

    def __init__(self, n, ell=None):
        self.n = n
        self.ell = n if ell is None else ell

    def output_law(self, cap=None):
        if self.n > log2_cap(cap):
            raise CapExceeded("output cube", 2**self.n, 2 ** log2_cap(cap))
        return np.full(2**self.n, 2.0**-self.n)

    def random_sample(self, random_state=None):
        rng = as_rng(random_state)
        return (1 - 2 * rng.integers(0, 2, size=self.n)).astype(np.int8)


def pushforward(P, source, weights=None, samples=None, random_state=None, cap=None):
    """Law of P(x) for x drawn from ``source``.

    ``source`` is an integer n (uniform cube), an array of points (rows) with
    optional ``weights``, or a callable ``rng -> point`` used with ``samples``.
    """
    if callable(source):
        if samples is None:
            raise ParameterError("sampler mode needs a sample count")
        rng = as_rng(random_state)
        X = np.array([source(rng) for _ in range(int(samples))])
        return DiscreteDistribution.from_values(P.evaluate(X), exact=False, sample_count=int(samples))
    if isinstance(source, (int, np.integer)):
        n = int(source)
        if n > log2_cap(cap):
            if samples is None:
                raise CapExceeded("uniform cube", 2**n, 2 ** log2_cap(cap))
            rng = as_rng(random_state)
            X = 1 - 2 * rng.integers(0, 2, size=(int(samples), n))
            return DiscreteDistribution.from_values(P.evaluate(X), exact=False, sample_count=int(samples))
        source = cube_points(n)
    X = np.asarray(source)
    if len(X) > 2 ** log2_cap(cap):
        raise CapExceeded("point set", len(X), 2 ** log2_cap(cap))
    return DiscreteDistribution.from_values(P.evaluate(X), weights)


def _normalized(P):
    scale = P.l2_norm()
    if scale == 0:
        raise ParameterError("zero polynomial")
    return P.scaled(1.0 / scale), scale


def lipschitz_fooling_error(P, gen, mode="auto", samples=None, random_state=None, cap=None):
    """W1 between P on the uniform cube and P on the generator, with P scaled to norm 1.

    ``mode`` is ``"exact"`` (full seed space), ``"mc"`` (sampled seeds, needs
    ``samples``) or ``"auto"`` (exact when enumerable).
    """
    if P.degree > gen.ell:
        raise ParameterError(f"polynomial degree {P.degree} exceeds generator degree {gen.ell}")
    if P.n_vars > gen.n:
        raise ParameterError("polynomial uses more variables than the generator outputs")
    Pn, scale = _normalized(P)
    n = gen.n
    result = {"scale": scale, "eps_target": getattr(gen, "eps", None)}
    if mode not in ("auto", "exact", "mc"):
        raise ParameterError(f"unknown mode {mode!r}")
    if mode in ("auto", "exact"):
        try:
            law = gen.output_law(cap)
        except CapExceeded:
            if mode == "exact":
                raise
        else:
            X = cube_points(n)
            vals = Pn.evaluate(X)
            w1 = wasserstein1(
                DiscreteDistribution.from_values(vals),
                DiscreteDistribution.from_values(vals, law),
            )
            result.update(w1=w1, exact=True)
            return result
    if samples is None:
        raise ParameterError("Monte Carlo mode needs a sample count")
    rng = as_rng(random_state)
    batches = 20
    per = max(1, int(samples) // batches)
    if n <= log2_cap(cap):
        uniform = DiscreteDistribution.from_values(Pn.evaluate(cube_points(n)))
    else:
        uniform = None
    vals = []
    for _ in range(batches):
        Y = np.array([gen.random_sample(rng) for _ in range(per)])
        G = DiscreteDistribution.from_values(Pn.evaluate(Y), exact=False, sample_count=per)
        U = uniform
        if U is None:
            U = DiscreteDistribution.from_values(
                Pn.evaluate(1 - 2 * rng.integers(0, 2, size=(per, n))), exact=False
            )
        vals.append(wasserstein1(U, G))
    vals = np.array(vals)
    se = float(vals.std(ddof=1) / math.sqrt(batches))
    result.update(
        w1=float(vals.mean()),
        exact=False,
        samples=per * batches,
        stderr=se,
        ci99=[float(vals.mean() - Z99 * se), float(vals.mean() + Z99 * se)],
    )
    return result


def _rowwise_kolmogorov(values, p, q, tol=1e-12):
    """sup_s |P_p(L <= s) - P_q(L <= s)| for each row L of ``values``."""
    order = np.argsort(values, axis=1, kind="stable")
    v = np.take_along_axis(values, order, axis=1)
    cs = np.cumsum((p - q)[order], axis=1)
    ends = np.ones_like(v, dtype=bool)
    ends[:, :-1] = np.diff(v, axis=1) > tol * np.maximum(1.0, np.abs(v[:, 1:]))
    return np.max(np.where(ends, np.abs(cs), 0.0), axis=1)


def observed_halfspace_error(P, h, gen):
    """Largest CDF gap of the inner fooler over the affine forms a fixed hash produces.

    With every coordinate outside a bucket and every mask sign fixed, the
    pruned polynomial is affine in the bucket's inner variables; this returns
    the maximum Kolmogorov distance, over all those forms and all buckets,
    between the form under the inner law and under uniform bits.
    """
    Ph = prune_h_bad(P, h)
    n = gen.n
    X = cube_points(n).astype(float)
    h = np.asarray(h)
    worst = 0.0
    for b in np.unique(h):
        coords = np.flatnonzero(h == b)
        s = len(coords)
        law = gen._inner_prefix_law(s)
        uniform = np.full(2**s, 2.0**-s)
        if np.allclose(law, uniform, rtol=0, atol=1e-15):
            continue
        slopes = np.empty((len(X), s))
        for j, c in enumerate(coords):
            up, down = X.copy(), X.copy()
            up[:, c], down[:, c] = 1.0, -1.0
            slopes[:, j] = (Ph.evaluate(up) - Ph.evaluate(down)) / 2
        Zs = cube_points(s).astype(float)
        forms = np.unique(np.round((slopes[:, None, :] * Zs[None, :, :]).reshape(-1, s), 12), axis=0)
        worst = max(worst, float(_rowwise_kolmogorov(forms @ Zs.T, law, uniform).max()))
    return worst


def fooling_decomposition(P, gen, cap=None):
    """Exact pieces of the prune-then-hybrid bound on the fooling error.

    Reports the total W1, the averaged pruning gaps E_h E|P - P_h| under the
    uniform cube and under the generator, the averaged and worst per-hash
    hybrid W1, the observed halfspace error, and the two analytic bounds
    ell/sqrt(t) and 4 sqrt(t * delta_observed).
    """
    Pn, scale = _normalized(P)
    n = gen.n
    X = cube_points(n)
    vals = Pn.evaluate(X)
    uniform = np.full(2**n, 2.0**-n)
    total_law = np.zeros(2**n)
    pruning_u = pruning_g = hybrid_avg = hybrid_max = bad_avg = 0.0
    delta_obs = 0.0
    per_hash = []
    for part in gen.conditional_laws(cap):
        Ph = prune_h_bad(Pn, part.hash_fn)
        ph_vals = Ph.evaluate(X)
        diff = np.abs(vals - ph_vals)
        total_law += part.weight * part.output_law
        pruning_u += part.weight * float(diff @ uniform)
        pruning_g += part.weight * float(diff @ part.output_law)
        hyb = wasserstein1(
            DiscreteDistribution.from_values(ph_vals),
            DiscreteDistribution.from_values(ph_vals, part.output_law),
        )
        hybrid_avg += part.weight * hyb
        d_obs = observed_halfspace_error(Pn, part.hash_fn, gen)
        per_hash.append((hyb, d_obs))
        hybrid_max = max(hybrid_max, hyb)
        delta_obs = max(delta_obs, d_obs)
        bad_avg += part.weight * (Pn.l2_norm() ** 2 - Ph.l2_norm() ** 2)
    w1 = wasserstein1(DiscreteDistribution.from_values(vals), DiscreteDistribution.from_values(vals, total_law))
    t = gen.t
    ell = gen.ell
    hybrid_bound = 4 * math.sqrt(t * delta_obs)
    return {
        "w1": w1,
        "scale": scale,
        "pruning_uniform": pruning_u,
        "pruning_generator": pruning_g,
        "pruning": max(pruning_u, pruning_g),
        "pruning_bound": ell / math.sqrt(t),
        "bad_weight_avg": bad_avg,
        "bad_weight_bound": ell**2 / t,
        "hybrid": hybrid_avg,
        "hybrid_max": hybrid_max,
        "delta_observed": delta_obs,
        "hybrid_bound": hybrid_bound,
        "per_hash_ok": all(hyb <= 4 * math.sqrt(t * d) + 1e-12 for hyb, d in per_hash),
        "triangle_ok": w1 <= pruning_u + hybrid_avg + pruning_g + 1e-12,
    }


def tail_bound_audit(k, N, threshold, exact=True, trials=None, random_state=None, cap=None):
    """Compare P[|sum X_i| >= t sqrt(N)] for a k-wise source with k^(k/2) / t^k."""
    if k % 2:
        raise ParameterError("k must be even")
    src = KWiseSource(N, k)
    rhs = math.inf if threshold == 0 else k ** (k / 2) / threshold**k
    if exact:
        sums = src.all_outputs(cap=cap).astype(np.int64).sum(axis=1)
        count = len(sums)
    else:
        if trials is None:
            raise ParameterError("sampled audit needs a trial count")
        rng = as_rng(random_state)
        sums = np.array([int(src.random_sample(rng).sum()) for _ in range(int(trials))])
        count = int(trials)
    # |S| >= t sqrt(N)  <=>  S^2 >= t^2 N, avoiding a square root
    hits = sums.astype(float) ** 2 >= threshold**2 * N
    lhs = float(hits.mean())
    out = {"k": k, "N": N, "threshold": threshold, "lhs": lhs, "rhs": rhs, "ok": lhs <= rhs, "exact": exact}
    if not exact:
        se = math.sqrt(lhs * (1 - lhs) / count)
        out.update(samples=count, ci99=[lhs - Z99 * se, lhs + Z99 * se])
    return out


def zeta(x):
    """Squared distance to [0, 1]: (min(0, x, 1 - x))^2."""
    x = np.asarray(x, dtype=float)
    out = np.minimum(0.0, np.minimum(x, 1.0 - x)) ** 2
    return float(out) if out.ndim == 0 else out


def invariance_gap(P, n_rm, d, samples=None, random_state=None, cap=None):
    """|E zeta(P(X))| on the uniform cube minus the same on uniform RM(n_rm, d).

    Variable i of P reads the codeword at point i-1.  Returns a dict with the
    gap and whether the cube side was exact.
    """
    N = 2**n_rm
    if P.n_vars > N:
        raise ParameterError(f"polynomial uses {P.n_vars} variables, code length is {N}")
    code = RMCode(n_rm, d)
    Y = (1 - 2 * code.codewords(cap=cap).astype(np.int8)).astype(np.int8)
    code_side = float(np.mean(zeta(P.evaluate(Y))))
    if N <= log2_cap(cap):
        cube_side = float(np.mean(zeta(P.evaluate(cube_points(N)))))
        exact = True
    else:
        if samples is None:
            raise CapExceeded("uniform cube", 2**N, 2 ** log2_cap(cap))
        rng = as_rng(random_state)
        X = 1 - 2 * rng.integers(0, 2, size=(int(samples), N))
        cube_side = float(np.mean(zeta(P.evaluate(X))))
        exact = False
    return {"gap": abs(cube_side - code_side), "cube": cube_side, "code": code_side, "exact": exact}
