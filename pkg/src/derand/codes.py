"""Reed-Muller codes over GF(2).

Conventions used throughout the package:

* Points of F_2^n are integers ``0 .. 2^n - 1``; coordinate ``x_1`` is the most
  significant bit, so point ``x`` has ``x_j = (x >> (n - j)) & 1``.
* A word of length ``N = 2^n`` is a uint8 array indexed by point.  Packed
  integers and hex strings put point ``0...0`` in the most significant bit.
* Generator rows are monomials in graded-lexicographic order (degree first,
  then lexicographic on the sorted variable tuple, variables 1-indexed).
* Codeword ``m`` is the message-lexicographic one: row 0 of the generator is
  the most significant bit of the message integer ``m``.  XOR of message
  integers is XOR of codewords.
* A character chi_alpha of the code is addressed by its syndrome
  ``beta = G alpha`` packed the same way as messages, so that
  ``chi_alpha(codeword m) = (-1)^popcount(beta & m)``.
"""

import itertools
import json
from functools import cached_property
from math import comb

import numpy as np

from ._util import as_rng, bits_to_int, log2_cap, popcount
from .errors import CapExceeded, ParameterError

MAX_N = 10


def points(n):
    """All points of F_2^n as an (2^n, n) uint8 array, ``x_1`` first."""
    idx = np.arange(2**n)
    return ((idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1).astype(np.uint8)


def monomials(n, d):
    """Monomials of degree <= d as sorted tuples of 1-indexed variables."""
    out = []
    for deg in range(0, d + 1):
        out.extend(itertools.combinations(range(1, n + 1), deg))
    return out


def rm_dimension(n, d):
    if d < 0:
        return 0
    return sum(comb(n, i) for i in range(min(d, n) + 1))


class RMCode:
    """The code RM(n, d); ``d = -1`` gives the zero code (dual of the full space)."""

    def __init__(self, n, d):
        if not (0 <= n <= MAX_N):
            raise ParameterError(f"n must lie in [0, {MAX_N}], got {n}")
        if not (-1 <= d <= n):
            raise ParameterError(f"d must lie in [0, n={n}], got {d}")
        self.n = n
        self.d = d
        self.monomials = monomials(n, d) if d >= 0 else []
        pts = points(n)
        rows = [
            np.prod(pts[:, [v - 1 for v in mono]], axis=1) if mono else np.ones(2**n)
            for mono in self.monomials
        ]
        self.generator = np.array(rows, dtype=np.uint8).reshape(len(rows), 2**n)
        self.generator.setflags(write=False)

    def __repr__(self):
        return f"RMCode(n={self.n}, d={self.d})"

    @property
    def length(self):
        return 2**self.n

    @property
    def dimension(self):
        return len(self.monomials)

    @property
    def size(self):
        return 2**self.dimension

    @property
    def dual(self):
        return RMCode(self.n, self.n - self.d - 1)

    def encode(self, messages):
        """Codewords for message integers (scalar or array)."""
        m = np.atleast_1d(np.asarray(messages, dtype=np.int64))
        k = self.dimension
        bits = ((m[:, None] >> (k - 1 - np.arange(k))[None, :]) & 1).astype(np.int64)
        words = (bits @ self.generator.astype(np.int64)) % 2
        words = words.astype(np.uint8)
        return words[0] if np.ndim(messages) == 0 else words

    @cached_property
    def column_syndromes(self):
        """Syndrome contribution of each coordinate: ``beta(e_x)`` as an int."""
        k = self.dimension
        weights = (1 << (k - 1 - np.arange(k))).astype(np.int64)
        return (self.generator.astype(np.int64) * weights[:, None]).sum(axis=0)

    def syndrome(self, words):
        """Character index ``beta = G alpha`` for words alpha (any shape ``(..., N)``)."""
        w = np.asarray(words, dtype=np.int64)
        k = self.dimension
        bits = (w @ self.generator.T.astype(np.int64)) % 2
        weights = (1 << (k - 1 - np.arange(k))).astype(np.int64)
        return bits @ weights

    @cached_property
    def _packed_index(self):
        packed = pack(self.codewords())
        order = np.argsort(packed)
        return packed[order], order

    def message_of(self, words):
        """Inverse of :meth:`encode` for words known to lie in the code."""
        w = np.atleast_2d(np.asarray(words, dtype=np.uint8))
        keys, order = self._packed_index
        packed = pack(w)
        pos = np.searchsorted(keys, packed)
        pos = np.minimum(pos, len(keys) - 1)
        if np.any(keys[pos] != packed):
            raise ParameterError("word is not a codeword")
        out = order[pos]
        return int(out[0]) if np.asarray(words).ndim == 1 else out

    def contains(self, word):
        w = np.asarray(word, dtype=np.int64)
        dual = self.dual
        if dual.dimension == 0:
            return True
        return not np.any((dual.generator.astype(np.int64) @ w) % 2)

    def codewords(self, cap=None):
        return enumerate_codewords(self, cap=cap)


def rm_generator_matrix(n, d):
    """Build RM(n, d) with its monomial generator matrix."""
    if d < 0:
        raise ParameterError(f"d must lie in [0, n={n}], got {d}")
    return RMCode(n, d)


def enumerate_codewords(code, cap=None):
    """All ``2^dimension`` codewords as rows, in message-lexicographic order."""
    limit = log2_cap(cap)
    if code.dimension > limit:
        raise CapExceeded(f"RM({code.n},{code.d}) enumeration", 2**code.dimension, 2**limit)
    return code.encode(np.arange(code.size))


def encode_polynomial(coeffs, n):
    """Evaluation vector of an F_2 polynomial.

    ``coeffs`` maps monomials (iterables of 1-indexed variables) to 0/1.
    """
    pts = points(n)
    word = np.zeros(2**n, dtype=np.uint8)
    for mono, c in dict(coeffs).items():
        mono = tuple(sorted(set(mono)))
        if any(v < 1 or v > n for v in mono):
            raise ParameterError(f"monomial {mono} references a variable outside 1..{n}")
        if int(c) % 2 == 0:
            continue
        if mono:
            word ^= np.prod(pts[:, [v - 1 for v in mono]], axis=1).astype(np.uint8)
        else:
            word ^= 1
    return word


def verify_duality(n, d):
    """Check that RM(n, n-d-1) is the dual of RM(n, d).

    Even intersection of every pair of codewords is bilinear in the messages,
    so it is enough to check every pair of generator rows; together with
    the dimension count this is the full duality statement.
    """
    code = RMCode(n, d)
    dual = RMCode(n, n - d - 1)
    if code.dimension + dual.dimension != 2**n:
        return False
    if dual.dimension == 0 or code.dimension == 0:
        return True
    prod = code.generator.astype(np.int64) @ dual.generator.astype(np.int64).T
    return not np.any(prod % 2)


def coset_degree(alpha, n, d, samples=None, random_state=None, cap=None):
    """deg(chi_alpha): minimum weight of ``alpha + y`` over y in RM(n, n-d-1).

    Exact when the dual code is enumerable.  With ``samples`` and a dual code
    over the cap, returns ``(upper_estimate, False)`` from random dual words;
    the exact path returns ``(value, True)``.
    """
    alpha = np.asarray(alpha, dtype=np.uint8)
    if alpha.shape != (2**n,):
        raise ParameterError(f"alpha must have length {2**n}")
    dual = RMCode(n, n - d - 1)
    if dual.dimension == 0:
        return int(alpha.sum()), True
    if dual.dimension <= log2_cap(cap):
        words = dual.codewords(cap=cap)
        return int((words ^ alpha).sum(axis=1).min()), True
    if samples is None:
        raise CapExceeded(f"coset of RM({n},{n - d - 1})", 2**dual.dimension, 2 ** log2_cap(cap))
    rng = as_rng(random_state)
    msgs = rng.integers(0, 2**dual.dimension, size=int(samples))
    words = dual.encode(msgs)
    return int(min(alpha.sum(), (words ^ alpha).sum(axis=1).min())), False


def gf2_rank(rows):
    """Rank over GF(2) of integer-encoded row vectors."""
    basis = []
    for r in rows:
        r = int(r)
        for b in basis:
            r = min(r, r ^ b)
        if r:
            basis.append(r)
    return len(basis)


def affine_form_product(n, linear_parts, constants):
    """Evaluation vector of prod_i (<a_i, x> + c_i) over F_2."""
    idx = np.arange(2**n)
    word = np.ones(2**n, dtype=np.uint8)
    for a, c in zip(linear_parts, constants):
        word &= ((popcount(idx & int(a)) + int(c)) % 2).astype(np.uint8)
    return word


def sample_min_weight_codeword(n, d, random_state=None, max_tries=10**6):
    """Product of d random affine forms with independent linear parts.

    The result is the indicator of a uniformly random affine subspace of
    codimension d, a minimum-weight codeword of RM(n, d) (weight 2^(n-d)).
    """
    if not (1 <= d <= n):
        raise ParameterError(f"need 1 <= d <= n, got d={d}, n={n}")
    rng = as_rng(random_state)
    for _ in range(max_tries):
        parts = rng.integers(1, 2**n, size=d)
        if gf2_rank(parts) == d:
            consts = rng.integers(0, 2, size=d)
            return affine_form_product(n, parts, consts)
    raise RuntimeError("rejection sampler exceeded its retry budget")


def affine_subspace_indicators(n, d):
    """Every codimension-d affine subspace indicator, as rows (distinct, sorted)."""
    if not (1 <= d <= n):
        raise ParameterError(f"need 1 <= d <= n, got d={d}, n={n}")
    seen = set()
    for parts in itertools.combinations(range(1, 2**n), d):
        if gf2_rank(parts) != d:
            continue
        for consts in itertools.product((0, 1), repeat=d):
            seen.add(bits_to_int(affine_form_product(n, parts, consts)))
    packed = np.array(sorted(seen), dtype=np.uint64)
    return unpack(packed, 2**n)


def coset_leaders(code, cap=None):
    """Minimum-weight representative of every coset of ``code.dual`` in F_2^N.

    Cosets are indexed by syndrome under ``code`` (see module docstring).  Ties
    between equal-weight members go to the lexicographically smallest word.
    Returns ``(leaders, degrees)`` with leaders as packed ints.
    """
    N = code.length
    k = code.dimension
    total = 2**k
    leaders = np.full(total, -1, dtype=np.int64)
    degrees = np.full(total, -1, dtype=np.int64)
    cols = code.column_syndromes
    limit = 2 ** (log2_cap(cap) + 2)
    remaining = total
    visited = 0
    for w in range(N + 1):
        if remaining == 0:
            break
        count = comb(N, w)
        visited += count
        if visited > limit:
            raise CapExceeded("coset leader search", visited, limit)
        combos = np.array(list(itertools.combinations(range(N), w)), dtype=np.int64).reshape(count, w)
        synd = np.zeros(count, dtype=np.int64)
        packed = np.zeros(count, dtype=np.int64)
        for j in range(w):
            synd ^= cols[combos[:, j]]
            packed |= np.int64(1) << (N - 1 - combos[:, j])
        order = np.lexsort((packed, synd))
        synd, packed = synd[order], packed[order]
        first = np.unique(synd, return_index=True)[1]
        synd, packed = synd[first], packed[first]
        new = leaders[synd] < 0
        leaders[synd[new]] = packed[new]
        degrees[synd[new]] = w
        remaining -= int(new.sum())
    return leaders, degrees


def pack(words):
    """Pack rows of bits into ints (point 0 most significant)."""
    w = np.atleast_2d(np.asarray(words, dtype=np.uint64))
    N = w.shape[1]
    if N > 64:
        raise ParameterError("packing supports N <= 64")
    shifts = (N - 1 - np.arange(N)).astype(np.uint64)
    return (w << shifts[None, :]).sum(axis=1, dtype=np.uint64)


def unpack(packed, length):
    p = np.atleast_1d(np.asarray(packed, dtype=np.uint64))
    shifts = (length - 1 - np.arange(length)).astype(np.uint64)
    return ((p[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)


def to_hex(word):
    N = len(word)
    return format(bits_to_int(word), f"0{max(1, (N + 3) // 4)}x")


def from_hex(text, length):
    value = int(text, 16)
    if value >> length:
        raise ParameterError(f"hex word {text!r} does not fit in {length} bits")
    return unpack([value], length)[0]


def dump_codewords(n, d, words):
    return json.dumps({"n": n, "d": d, "words": [to_hex(w) for w in words]})


def load_codewords(text):
    doc = json.loads(text)
    n, d = int(doc["n"]), int(doc["d"])
    words = np.array([from_hex(h, 2**n) for h in doc["words"]], dtype=np.uint8)
    return n, d, words.reshape(len(doc["words"]), 2**n)
