"""The noisy short-code Cayley graph on RM(n, d) and its orbit quotient.

Vertices are codewords, addressed by message integer.  A step adds a random
codeword ``z`` drawn from ``step_law``: the sum of ``M`` independent
indicators of codimension-d affine subspaces (the minimum-weight codewords),
with ``M`` Poisson of mean ``eps * 2^(d-1)`` truncated at ``M_max``.  Every
character is an eigenvector, so the spectrum is the Walsh-Hadamard transform
of ``step_law`` indexed by syndrome.
"""

import json
import math
from functools import cached_property, lru_cache

import numpy as np

from ._util import as_rng, fwht, log2_cap
from .codes import RMCode, affine_subspace_indicators, coset_leaders, to_hex, unpack
from .errors import CapExceeded, ParameterError

EPS_MAX = 1 / 8


@lru_cache(maxsize=16)
def _leaders(n, d):
    return coset_leaders(RMCode(n, d))


@lru_cache(maxsize=16)
def single_step_counts(n, d):
    """Number of codimension-d affine subspaces whose indicator is codeword m."""
    code = RMCode(n, d)
    steps = code.message_of(affine_subspace_indicators(n, d))
    return np.bincount(np.atleast_1d(steps), minlength=code.size).astype(np.int64)


def _convolution_powers(counts, m_max):
    """Exact integer XOR-convolution powers ``counts^{*m}`` for m = 0..m_max."""
    hat = fwht(np.asarray(counts).astype(object), dtype=object)
    size = len(counts)
    return [fwht(hat**m, dtype=object) // size for m in range(m_max + 1)]


def _inner_products(code):
    """N - 2 wt(z) for every codeword z (the inner product of u and u + z in +-1 form)."""
    weights = code.codewords().sum(axis=1).astype(np.int64)
    return code.length - 2 * weights


def poisson_weights(mean, m_max):
    w = np.array([math.exp(-mean) * mean**m / math.factorial(m) for m in range(m_max + 1)])
    return w / w.sum()


class ShortCodeGraph:
    """Weighted Cayley graph on RM(n, d).  Immutable once built."""

    def __init__(self, n, d, eps, step_law, *, m_max=None, truncated=False, meta=None):
        self.code = RMCode(n, d)
        self.n, self.d = n, d
        self.eps = float(eps)
        self.rho = math.exp(-self.eps)
        law = np.asarray(step_law, dtype=float)
        if law.shape != (self.code.size,):
            raise ParameterError(f"step law must have {self.code.size} entries")
        if np.any(law < 0) or abs(law.sum() - 1) > 1e-12:
            raise ParameterError("step law must be a probability vector")
        law.setflags(write=False)
        self.step_law = law
        self.m_max = m_max
        self.truncated = truncated
        self.meta = dict(meta or {})

    @classmethod
    def identity(cls, n, d):
        """The zero-noise graph: every step is the zero codeword."""
        law = np.zeros(2 ** RMCode(n, d).dimension)
        law[0] = 1.0
        return cls(n, d, 0.0, law, m_max=0)

    def __repr__(self):
        return f"ShortCodeGraph(n={self.n}, d={self.d}, eps={self.eps})"

    @property
    def n_vertices(self):
        return self.code.size

    @cached_property
    def eigenvalues(self):
        """lambda indexed by syndrome: E_z[chi(z)] under the step law."""
        lam = fwht(self.step_law)
        lam.setflags(write=False)
        return lam

    @cached_property
    def weights(self):
        """W[u, v] = P(step = u + v) / |V|: the law of a stationary edge."""
        idx = np.arange(self.code.size)
        return self.step_law[idx[:, None] ^ idx[None, :]] / self.code.size

    @property
    def stationary(self):
        return np.full(self.code.size, 1.0 / self.code.size)

    @cached_property
    def coset_table(self):
        """(leaders as packed ints, coset degrees), indexed by syndrome."""
        return _leaders(self.n, self.d)

    def sample_steps(self, count, random_state=None):
        rng = as_rng(random_state)
        return rng.choice(self.code.size, size=int(count), p=self.step_law)

    def to_dict(self):
        return {
            "n": self.n,
            "d": self.d,
            "eps": self.eps,
            "m_max": self.m_max,
            "truncated": self.truncated,
            "step_law": self.step_law.tolist(),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, doc):
        return cls(
            int(doc["n"]),
            int(doc["d"]),
            float(doc["eps"]),
            doc["step_law"],
            m_max=doc.get("m_max"),
            truncated=bool(doc.get("truncated", False)),
            meta=doc.get("meta"),
        )

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def spectrum_rows(self):
        """Rows (coset_rep_hex, degree, lambda) for every character."""
        leaders, degrees = self.coset_table
        N = self.code.length
        reps = unpack(leaders.astype(np.uint64), N)
        return [(to_hex(reps[b]), int(degrees[b]), float(self.eigenvalues[b])) for b in range(self.code.size)]


def default_truncation(n, d):
    # A lone step already flips N/2^d coordinates, which breaks <u,v> > 3N/4 when d <= 3.
    return d >= 4


def build_short_code_graph(n, d, eps, random_state=None, *, truncate=None, m_max=None, cap=None, strict=True):
    """Build G(n, d, eps).

    ``truncate`` rejects steps with ``<u, v> <= 3N/4`` and renormalizes.  It
    defaults to on exactly when a single minimum-weight step survives the
    rejection (d >= 4); for smaller d it would leave only the zero step.
    ``random_state`` is accepted for interface symmetry: the law is computed
    exactly, so no randomness is consumed.  With ``strict=False`` any
    ``eps > 0`` is accepted and ``meta["eps_in_range"]`` records whether it
    lies in (0, 1/8).
    """
    del random_state
    in_range = 0 < eps < EPS_MAX
    if not in_range and (strict or eps <= 0):
        raise ParameterError(f"eps must lie in (0, 1/8), got {eps}")
    if not 1 <= d <= n:
        raise ParameterError(f"need 1 <= d <= n, got n={n}, d={d}")
    code = RMCode(n, d)
    if code.dimension > log2_cap(cap):
        raise CapExceeded(f"RM({n},{d})", code.size, 2 ** log2_cap(cap))
    mean = eps * 2 ** (d - 1)
    if m_max is None:
        m_max = max(1, math.ceil(16 * eps * 2**d))
    counts = single_step_counts(n, d)
    total = int(counts.sum())
    weights = poisson_weights(mean, m_max)
    law = np.zeros(code.size)
    # Equal integer counts give bit-identical probabilities, so automorphisms act exactly.
    for m, power in enumerate(_convolution_powers(counts, m_max)):
        denom = total**m
        law += weights[m] * np.array([c / denom for c in power], dtype=float)
    if truncate is None:
        truncate = default_truncation(n, d)
    if truncate:
        bad = _inner_products(code) <= 3 * code.length / 4
        bad[0] = False
        law[bad] = 0.0
    law /= law.sum()
    meta = {"poisson_mean": mean, "single_step_support": int(np.count_nonzero(counts)), "eps_in_range": in_range}
    return ShortCodeGraph(n, d, eps, law, m_max=m_max, truncated=bool(truncate), meta=meta)


def single_step_character(n, d):
    """q indexed by syndrome: E[chi(z)] for one uniform minimum-weight step."""
    counts = single_step_counts(n, d)
    return fwht(counts) / counts.sum()


def closed_form_eigenvalues(n, d, eps):
    """exp(mean * (q - 1)): the untruncated Poisson limit."""
    return np.exp(eps * 2 ** (d - 1) * (single_step_character(n, d) - 1))


def _syndrome_of(graph, alpha):
    if isinstance(alpha, (int, np.integer)):
        beta = int(alpha)
        if not 0 <= beta < graph.code.size:
            raise ParameterError("syndrome out of range")
        return beta
    return int(graph.code.syndrome(np.asarray(alpha, dtype=np.uint8)))


def eigenvalue(graph, alpha):
    """lambda of chi_alpha; ``alpha`` is a length-N word or a syndrome int."""
    return float(graph.eigenvalues[_syndrome_of(graph, alpha)])


def spectrum_audit(graph, delta):
    """Compare the spectrum with the rho^k profile and check the adjacency geometry."""
    leaders, degrees = graph.coset_table
    lam = np.asarray(graph.eigenvalues)
    rho = graph.rho
    rho_k = rho ** degrees.astype(float)
    gap = np.abs(lam - rho_k)
    threshold = delta**2 * 2 ** (graph.d + 1)
    low = degrees < threshold
    violations = np.flatnonzero(low & (gap > delta + 1e-12))

    by_degree = {}
    for k in np.unique(degrees):
        sel = degrees == k
        by_degree[int(k)] = {
            "count": int(sel.sum()),
            "max_gap": float(gap[sel].max()),
            "lambda_min": float(lam[sel].min()),
            "lambda_max": float(lam[sel].max()),
        }

    # Smallest mu0 with lambda <= max(rho^{k/2}, rho^{mu0 2^d}) for every character.
    mu0 = None
    if graph.eps > 0:
        above = lam > rho ** (degrees / 2.0) + 1e-12
        if np.any(above & (lam <= 0)):
            mu0 = None
        elif np.any(above):
            mu0 = float(np.min(-np.log(lam[above]) / (graph.eps * 2**graph.d)))
    spectral_ok = mu0 is None or mu0 > 0

    inner = _inner_products(graph.code)
    support = graph.step_law > 0
    mean_inner = float(graph.step_law @ inner)
    min_inner = int(inner[support].min())
    N = graph.code.length
    leaders_hex = [to_hex(w) for w in unpack(leaders.astype(np.uint64), N)]
    table = [
        {
            "syndrome": int(b),
            "coset_rep_hex": leaders_hex[b],
            "degree": int(degrees[b]),
            "lambda": float(lam[b]),
            "rho_k": float(rho_k[b]),
            "gap": float(gap[b]),
        }
        for b in range(graph.code.size)
    ]
    degenerate = graph.eps == 0
    return {
        "n": graph.n,
        "d": graph.d,
        "eps": graph.eps,
        "rho": rho,
        "delta": delta,
        "degree_threshold": threshold,
        "low_degree_violations": [int(b) for b in violations],
        "low_degree_ok": bool(len(violations) == 0),
        "max_gap_by_degree": by_degree,
        "fitted_mu0": mu0,
        "spectral_ok": bool(spectral_ok),
        "lambda_zero": float(lam[0]),
        "max_abs_lambda": float(np.abs(lam).max()),
        "mean_inner_product": mean_inner,
        "mean_inner_bound": (1 - graph.eps) * N,
        "mean_inner_ok": bool(mean_inner >= (1 - graph.eps) * N - 1e-9),
        "min_adjacent_inner_product": min_inner,
        "adjacency_threshold": 3 * N / 4,
        "adjacency_ok": bool(min_inner > 3 * N / 4),
        "truncated": graph.truncated,
        "degenerate": degenerate,
        "table": table,
    }


def affine_shift(v, b):
    """pi_b: the word whose value at point x is v(x + b)."""
    v = np.asarray(v)
    N = v.shape[-1]
    n = N.bit_length() - 1
    if 2**n != N:
        raise ParameterError("word length must be a power of two")
    if not isinstance(b, (int, np.integer)):
        bits = np.asarray(b, dtype=np.int64)
        b = int((bits << (n - 1 - np.arange(n))).sum())
    if not 0 <= b < N:
        raise ParameterError("shift point out of range")
    return v[..., np.arange(N) ^ int(b)]


@lru_cache(maxsize=16)
def shift_permutations(n, d):
    """perm[b, m] = message of pi_b(codeword m), for every point b."""
    code = RMCode(n, d)
    words = code.codewords()
    out = np.empty((2**n, code.size), dtype=np.int64)
    for b in range(2**n):
        out[b] = code.message_of(affine_shift(words, b))
    out.setflags(write=False)
    return out


class Orbits:
    """Partition of RM(n, d) into affine-shift orbits, ordered by least member."""

    def __init__(self, n, d):
        perms = shift_permutations(n, d)
        least = perms.min(axis=0)
        reps, labels = np.unique(least, return_inverse=True)
        self.n, self.d = n, d
        self.labels = labels
        self.representatives = reps
        self.sizes = np.bincount(labels)
        self.members = [np.flatnonzero(labels == j) for j in range(len(reps))]

    def __len__(self):
        return len(self.representatives)

    def indicator(self):
        A = np.zeros((len(self.labels), len(self)))
        A[np.arange(len(self.labels)), self.labels] = 1.0
        return A

    def lift(self, orbit_values):
        return np.asarray(orbit_values)[self.labels]


def orbits(n, d):
    return Orbits(n, d)


class FoldedGraph:
    def __init__(self, parent, orbit_partition):
        self.parent = parent
        self.orbits = orbit_partition
        A = orbit_partition.indicator()
        self.weights = A.T @ parent.weights @ A
        self.stationary = orbit_partition.sizes / parent.code.size

    @property
    def n_vertices(self):
        return len(self.stationary)

    def lift(self, S):
        """Vertex mask on the parent graph for an orbit set S."""
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[np.asarray(S, dtype=int) if np.asarray(S).dtype != bool else np.flatnonzero(S)] = True
        return mask[self.orbits.labels]


def fold(graph):
    return FoldedGraph(graph, orbits(graph.n, graph.d))


def check_automorphisms(graph):
    """Exact check that every pi_b preserves the step law, hence all edge weights."""
    perms = shift_permutations(graph.n, graph.d)
    return bool(all(np.array_equal(graph.step_law[p], graph.step_law) for p in perms))
