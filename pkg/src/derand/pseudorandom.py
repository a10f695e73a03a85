"""Hash families, bounded-independence sources and the hashing generator.

Sign vectors over {1,-1}^n are indexed by an integer ``s`` whose bit
``n-1-i`` is set when coordinate ``i`` (0-based) equals -1, matching the
point order of :mod:`derand.codes`.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from ._util import as_rng, fwht, log2_cap, parse_seed
from .errors import CapExceeded, ParameterError
from .gf2m import field_bits_for, gf_mul, poly_eval

DEFAULT_C = 4


def _check_seed(seed, nbits):
    value, width = parse_seed(seed)
    if value < 0 or value >> nbits:
        raise ParameterError(f"seed does not fit in {nbits} bits")
    unit = 8 if isinstance(seed, (bytes, bytearray)) else 4
    if width is not None and width > unit * -(-nbits // unit):
        raise ParameterError(f"seed has {width} bits, expected {nbits}")
    return value


def _split_fields(value, nbits, m, count):
    """Split the low ``nbits`` of ``value`` into ``count`` big-endian m-bit fields."""
    return [(value >> (nbits - m * (j + 1))) & ((1 << m) - 1) for j in range(count)]


def _signs_to_index(signs):
    s = np.atleast_2d(signs)
    n = s.shape[1]
    bits = (s < 0).astype(np.int64)
    return bits @ (1 << (n - 1 - np.arange(n))).astype(np.int64)


def xor_convolve(a, b):
    """Law of ``x XOR y`` for independent x ~ a, y ~ b (as index vectors)."""
    return fwht(fwht(a) * fwht(b)) / len(a)


class PairwiseHashFamily:
    """Carter-Wegman affine hashing ``i -> (a*i + b) mod 2^log2(t)`` over GF(2^m)."""

    def __init__(self, n, t):
        if n < 1:
            raise ParameterError("n must be positive")
        if t < 1 or t & (t - 1):
            raise ParameterError(f"bucket count must be a power of two, got {t}")
        self.n = n
        self.t = t
        self.m = field_bits_for(max(n, t))
        self.seed_bits = 2 * self.m

    def __repr__(self):
        return f"PairwiseHashFamily(n={self.n}, t={self.t})"

    def _evaluate(self, a, b):
        xs = np.arange(self.n, dtype=np.int64)
        a = np.asarray(a, dtype=np.int64)[..., None]
        b = np.asarray(b, dtype=np.int64)[..., None]
        return (gf_mul(a, xs, self.m) ^ b) & (self.t - 1)

    def sample(self, seed):
        value = _check_seed(seed, self.seed_bits)
        a, b = _split_fields(value, self.seed_bits, self.m, 2)
        return self._evaluate(a, b)

    def all_functions(self, cap=None):
        """Every member, one row per seed in increasing seed order."""
        if self.seed_bits > log2_cap(cap):
            raise CapExceeded("hash family", 2**self.seed_bits, 2 ** log2_cap(cap))
        seeds = np.arange(2**self.seed_bits, dtype=np.int64)
        return self._evaluate(seeds >> self.m, seeds & ((1 << self.m) - 1))


def pairwise_hash_sample(family, seed):
    return family.sample(seed)


class KWiseSource:
    """k-wise independent signs from a random degree-(k-1) polynomial over GF(2^m).

    Output coordinate i is the low bit of p(i) mapped to a sign.  The seed holds
    the k coefficients, constant term first.  Orders above n are clipped to n,
    where the output is already fully uniform.
    """

    def __init__(self, n, k):
        if n < 1 or k < 1:
            raise ParameterError("need n >= 1 and k >= 1")
        self.n = n
        self.k = k
        self.k_eff = min(k, n)
        self.m = field_bits_for(n)
        self.seed_bits = self.k_eff * self.m

    def __repr__(self):
        return f"KWiseSource(n={self.n}, k={self.k})"

    def _signs(self, coeffs, length):
        values = poly_eval(coeffs, np.arange(length), self.m)
        return (1 - 2 * (values & 1)).astype(np.int8)

    def sample(self, seed):
        value = _check_seed(seed, self.seed_bits)
        coeffs = _split_fields(value, self.seed_bits, self.m, self.k_eff)
        return self._signs(np.array(coeffs), self.n)

    def _all_coeffs(self, cap=None):
        if self.seed_bits > log2_cap(cap):
            raise CapExceeded("k-wise seed space", 2**self.seed_bits, 2 ** log2_cap(cap))
        seeds = np.arange(2**self.seed_bits, dtype=np.int64)
        shifts = self.m * (self.k_eff - 1 - np.arange(self.k_eff))
        return (seeds[:, None] >> shifts[None, :]) & ((1 << self.m) - 1)

    def all_outputs(self, length=None, cap=None):
        """Outputs for every seed (rows), optionally only the first ``length`` coordinates."""
        return self._signs(self._all_coeffs(cap), self.n if length is None else length)

    def prefix_law(self, length, cap=None):
        """Exact law of the first ``length`` coordinates, as a vector over 2^length indices."""
        if length <= self.k_eff:
            return np.full(2**length, 2.0**-length)
        idx = _signs_to_index(self.all_outputs(length, cap))
        return np.bincount(idx, minlength=2**length) / len(idx)

    def law(self, cap=None):
        return self.prefix_law(self.n, cap)

    def random_sample(self, random_state=None):
        rng = as_rng(random_state)
        coeffs = rng.integers(0, 2**self.m, size=self.k_eff)
        return self._signs(coeffs, self.n)


def kwise_sample(source, seed):
    return source.sample(seed)


def _schedule_fraction(x):
    return Fraction(str(float(x))) if not isinstance(x, Fraction) else x


def halfspace_order(eps_h, c=DEFAULT_C):
    """Independence order c * ln(1/eps)^2 / eps^2 (rounded up) for a halfspace fooler."""
    if not 0 < eps_h < 1:
        raise ParameterError("halfspace error must lie in (0, 1)")
    return math.ceil(c * math.log(1 / eps_h) ** 2 / eps_h**2)


class HalfspaceFooler:
    """Bounded-independence realization of a delta-fooler for halfspaces.

    The fooling error is a contract audited empirically (see
    :func:`derand.fooling.observed_halfspace_error`), never assumed.
    """

    def __init__(self, m, eps_h, c=DEFAULT_C, k=None):
        self.m = m
        self.eps_h = eps_h
        self.c = c
        self.k_h = halfspace_order(eps_h, c) if k is None else int(k)
        self.source = KWiseSource(m, self.k_h)
        self.seed_bits = self.source.seed_bits

    def __repr__(self):
        return f"HalfspaceFooler(m={self.m}, eps_h={self.eps_h}, k_h={self.k_h})"

    def sample(self, seed):
        return self.source.sample(seed)


def generator_parameters(ell, eps, c=DEFAULT_C, n=None):
    """Parameter schedule t = 16 l^2/eps^2, delta = eps^4/(64 l^2), k_h, k_mask.

    With ``n`` given, also reports the total seed length of the realized
    generator (bucket count rounded up to a power of two).
    """
    if ell < 1:
        raise ParameterError("degree bound must be >= 1")
    e = _schedule_fraction(eps)
    if not 0 < e < 1:
        raise ParameterError("eps must lie in (0, 1)")
    t = math.ceil(16 * ell**2 / e**2)
    delta = e**4 / (64 * ell**2)
    k_h = halfspace_order(float(delta), c)
    params = {
        "t": t,
        "delta": float(delta),
        "k_h": k_h,
        "k_mask": 2 * ell,
        "seed_bits_total": None,
    }
    if n is not None:
        gen = HashingGenerator(n, ell, eps, c=c)
        params["seed_bits_total"] = gen.seed_bits
    return params


def _next_pow2(x):
    return 1 << max(0, int(x - 1).bit_length())


@dataclass
class BucketLaw:
    """Law of the generator output conditioned on one hash partition."""

    hash_fn: np.ndarray
    weight: float
    inner_law: np.ndarray
    output_law: np.ndarray = field(repr=False)


class HashingGenerator:
    """Bucketed bounded-independence generator masked by a 2*ell-wise source.

    Coordinate i receives the inner sample of bucket h(i) at its rank within
    that bucket, times mask coordinate i.  Seed layout (big-endian):
    hash || inner_1 || ... || inner_t || mask.

    Any of ``t``, ``delta``, ``k_h`` may be overridden; ``on_schedule`` reports
    whether the realized parameters equal the schedule.
    """

    def __init__(self, n, ell, eps, c=DEFAULT_C, t=None, delta=None, k_h=None):
        self.n = n
        self.ell = ell
        self.eps = float(eps)
        self.c = c
        sched = generator_parameters(ell, eps, c)
        self.schedule = sched
        self.t = _next_pow2(sched["t"]) if t is None else int(t)
        self.delta = sched["delta"] if delta is None else float(delta)
        self.hash = PairwiseHashFamily(n, self.t)
        self.inner = HalfspaceFooler(n, self.delta, c, k=k_h)
        self.mask = KWiseSource(n, 2 * ell)
        self.overrides = {}
        if self.t != sched["t"]:
            self.overrides["t"] = self.t
        if delta is not None and self.delta != sched["delta"]:
            self.overrides["delta"] = self.delta
        if k_h is not None:
            self.overrides["k_h"] = self.inner.k_h
        self.on_schedule = not self.overrides
        self.seed_bits = self.hash.seed_bits + self.t * self.inner.seed_bits + self.mask.seed_bits

    def __repr__(self):
        return f"HashingGenerator(n={self.n}, ell={self.ell}, eps={self.eps}, t={self.t})"

    @property
    def params(self):
        return {
            "n": self.n,
            "ell": self.ell,
            "eps": self.eps,
            "c": self.c,
            "t": self.t,
            "delta": self.delta,
            "k_h": self.inner.k_h,
            "k_mask": self.mask.k,
            "seed_bits": self.seed_bits,
            "schedule": dict(self.schedule),
            "label": "on-schedule" if self.on_schedule else "overridden",
            "overrides": dict(self.overrides),
        }

    def split_seed(self, seed):
        value = _check_seed(seed, self.seed_bits)
        hb, ib, mb = self.hash.seed_bits, self.inner.seed_bits, self.mask.seed_bits
        mask_seed = value & ((1 << mb) - 1)
        rest = value >> mb
        inner = [(rest >> (ib * (self.t - 1 - j))) & ((1 << ib) - 1) for j in range(self.t)]
        hash_seed = rest >> (ib * self.t)
        assert hash_seed >> hb == 0
        return hash_seed, inner, mask_seed

    @staticmethod
    def bucket_positions(h):
        """Rank of each coordinate among the coordinates sharing its bucket."""
        h = np.asarray(h)
        pos = np.zeros(len(h), dtype=np.int64)
        seen = {}
        for i, b in enumerate(h):
            pos[i] = seen.get(int(b), 0)
            seen[int(b)] = pos[i] + 1
        return pos

    def assemble(self, h, inner_samples, mask_sample):
        pos = self.bucket_positions(h)
        inner = np.asarray(inner_samples)
        return (inner[np.asarray(h), pos] * np.asarray(mask_sample)).astype(np.int8)

    def sample(self, seed):
        hash_seed, inner_seeds, mask_seed = self.split_seed(seed)
        h = self.hash.sample(hash_seed)
        used = sorted(set(int(b) for b in h))
        inner = np.ones((self.t, self.n), dtype=np.int8)
        for b in used:
            inner[b] = self.inner.sample(inner_seeds[b])
        return self.assemble(h, inner, self.mask.sample(mask_seed))

    def random_sample(self, random_state=None):
        """One output for a uniformly random seed, drawn component-wise."""
        rng = as_rng(random_state)
        h = self.hash.sample(int(rng.integers(0, 2**self.hash.seed_bits)))
        inner = np.ones((self.t, self.n), dtype=np.int8)
        for b in set(int(x) for x in h):
            inner[b] = self.inner.source.random_sample(rng)
        return self.assemble(h, inner, self.mask.random_sample(rng))

    @cached_property
    def _mask_law(self):
        return self.mask.law()

    @lru_cache(maxsize=None)
    def _inner_prefix_law(self, size):
        return self.inner.source.prefix_law(size)

    def _partition_law(self, h):
        n = self.n
        idx = np.arange(2**n)
        law = np.ones(2**n)
        for b in np.unique(h):
            coords = np.flatnonzero(h == b)
            s = len(coords)
            sub = np.zeros(2**n, dtype=np.int64)
            for j, c in enumerate(coords):
                sub |= ((idx >> (n - 1 - c)) & 1) << (s - 1 - j)
            law *= self._inner_prefix_law(s)[sub]
        return law

    def conditional_laws(self, cap=None):
        """Exact laws given each distinct hash partition, with family weights."""
        hs = self.hash.all_functions(cap)
        keys = np.array([_canonical_partition(h) for h in hs])
        uniq, first, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
        out = []
        for j, c in zip(first, counts):
            h = hs[j]
            inner_law = self._partition_law(h)
            out.append(
                BucketLaw(
                    hash_fn=h,
                    weight=c / len(hs),
                    inner_law=inner_law,
                    output_law=xor_convolve(inner_law, self._mask_law),
                )
            )
        return out

    def output_law(self, cap=None):
        """Exact law of the output over the full seed space (vector over 2^n indices)."""
        if self.n > log2_cap(cap):
            raise CapExceeded("output cube", 2**self.n, 2 ** log2_cap(cap))
        law = np.zeros(2**self.n)
        for part in self.conditional_laws(cap):
            law += part.weight * part.output_law
        return law


def _canonical_partition(h):
    relabel = {}
    return tuple(relabel.setdefault(int(b), len(relabel)) for b in h)


def hashing_generator_sample(gen, seed):
    return gen.sample(seed)
