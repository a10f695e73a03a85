"""Vectorized arithmetic in GF(2^m) for small m."""

import numpy as np

from .errors import ParameterError

# Low-weight irreducible polynomials, bit i = coefficient of x^i.
IRREDUCIBLE = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10000011,
    8: 0b100011011,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


def field_bits_for(size):
    """Smallest m >= 1 with 2^m >= size."""
    m = max(1, int(size - 1).bit_length())
    if m not in IRREDUCIBLE:
        raise ParameterError(f"GF(2^{m}) not supported (domain size {size})")
    return m


def gf_mul(a, b, m):
    """Elementwise product in GF(2^m) (broadcasting)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    a, b = np.broadcast_arrays(a, b)
    acc = np.zeros(a.shape, dtype=np.int64)
    for i in range(m):
        acc ^= np.where((b >> i) & 1, a << i, 0)
    poly = IRREDUCIBLE[m]
    for bit in range(2 * m - 2, m - 1, -1):
        acc ^= np.where((acc >> bit) & 1, poly << (bit - m), 0)
    return acc


def poly_eval(coeffs, xs, m):
    """Evaluate polynomials at field points by Horner's rule.

    ``coeffs`` has shape ``(..., k)`` with the constant term first; the result
    has shape ``(..., len(xs))``.
    """
    c = np.asarray(coeffs, dtype=np.int64)
    xs = np.asarray(xs, dtype=np.int64)
    out = np.zeros(c.shape[:-1] + xs.shape, dtype=np.int64)
    for j in range(c.shape[-1] - 1, -1, -1):
        out = gf_mul(out, xs, m) ^ c[..., j, None]
    return out
