"""Sparse multilinear polynomials over the cube {1,-1}^n."""

import json
import math

import numpy as np

from ._util import as_rng
from .codes import points
from .errors import ParameterError


def cube_points(n):
    """All of {1,-1}^n as int8 rows, ordered like :func:`derand.codes.points`."""
    return (1 - 2 * points(n).astype(np.int8)).astype(np.int8)


class MultilinearPolynomial:
    """P(x) = sum_I a_I prod_{i in I} x_i with variables numbered from 1.

    Keys are sorted tuples of distinct variables; zero coefficients are dropped.
    """

    def __init__(self, terms=None):
        clean = {}
        for mono, coef in dict(terms or {}).items():
            key = tuple(sorted(int(v) for v in mono))
            if len(set(key)) != len(key):
                raise ParameterError(f"repeated variable in monomial {mono}")
            if any(v < 1 for v in key):
                raise ParameterError("variables are numbered from 1")
            coef = clean.get(key, 0.0) + float(coef)
            clean[key] = coef
        self.terms = {k: v for k, v in sorted(clean.items()) if v != 0.0}

    def __repr__(self):
        return f"MultilinearPolynomial({len(self.terms)} terms, degree {self.degree})"

    def __eq__(self, other):
        return isinstance(other, MultilinearPolynomial) and self.terms == other.terms

    @property
    def degree(self):
        return max((len(k) for k in self.terms), default=0)

    @property
    def n_vars(self):
        """Largest variable index used (0 for constants)."""
        return max((max(k) for k in self.terms if k), default=0)

    def scaled(self, factor):
        return MultilinearPolynomial({k: factor * v for k, v in self.terms.items()})

    def normalized(self):
        norm = self.l2_norm()
        if norm == 0:
            raise ParameterError("cannot normalize the zero polynomial")
        return self.scaled(1.0 / norm)

    def l2_norm(self):
        return l2_norm(self)

    def evaluate(self, x):
        return evaluate(self, x)

    def to_json(self):
        return json.dumps(
            {"terms": [{"vars": list(k), "coef": v} for k, v in self.terms.items()]}
        )

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text) if isinstance(text, str) else text
        return cls({tuple(t["vars"]): t["coef"] for t in doc["terms"]})


def evaluate(P, x):
    """Value of P at one sign vector, or at each row of a 2-D array."""
    x = np.asarray(x)
    batch = x.ndim == 2
    X = np.atleast_2d(x).astype(float)
    if P.n_vars > X.shape[1]:
        raise ParameterError(f"point has {X.shape[1]} coordinates, polynomial uses {P.n_vars}")
    out = np.zeros(X.shape[0])
    for mono, coef in P.terms.items():
        if mono:
            out += coef * np.prod(X[:, [v - 1 for v in mono]], axis=1)
        else:
            out += coef
    return out if batch else float(out[0])


def l2_norm(P):
    """sqrt(E[P(x)^2]) over the uniform cube, via Parseval."""
    return math.sqrt(sum(v * v for v in P.terms.values()))


def _bucket_of(h, v):
    try:
        return h[v - 1]
    except IndexError:
        raise ParameterError(f"hash undefined on variable {v}") from None


def is_h_bad(mono, h):
    buckets = [int(_bucket_of(h, v)) for v in mono]
    return len(set(buckets)) < len(buckets)


def prune_h_bad(P, h):
    """Drop every monomial with two variables in one bucket of h.

    ``h[i-1]`` is the bucket of variable i.
    """
    return MultilinearPolynomial({k: v for k, v in P.terms.items() if not is_h_bad(k, h)})


def bad_weight(P, h):
    return sum(v * v for k, v in P.terms.items() if is_h_bad(k, h))


def random_polynomial(n, degree, n_terms, random_state=None, exact_degree=True):
    """Random sparse polynomial with Gaussian coefficients, normalized to norm 1."""
    available = sum(math.comb(n, s) for s in range(degree + 1))
    if n_terms > available:
        raise ParameterError(f"only {available} monomials of degree <= {degree} in {n} variables")
    rng = as_rng(random_state)
    terms = {}
    if exact_degree and degree > 0:
        terms[tuple(sorted(rng.choice(n, size=degree, replace=False) + 1))] = rng.standard_normal()
    while len(terms) < n_terms:
        size = int(rng.integers(0, degree + 1))
        mono = tuple(sorted(rng.choice(n, size=size, replace=False) + 1))
        terms[mono] = rng.standard_normal()
    return MultilinearPolynomial(terms).normalized()
