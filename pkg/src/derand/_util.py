import os

import numpy as np

DEFAULT_LOG2_CAP = 24


def log2_cap(override=None):
    """Enumeration cap as a power of two; ``DERAND_CAP`` holds the exponent."""
    if override is not None:
        return int(override)
    return int(os.environ.get("DERAND_CAP", DEFAULT_LOG2_CAP))


def as_rng(random_state=None):
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


def fwht(values, dtype=float):
    """Unnormalized Walsh-Hadamard transform along the last axis.

    ``out[b] = sum_m (-1)^popcount(b & m) * values[m]``; length must be a power of two.
    Pass ``dtype=object`` for exact arithmetic on Python ints.
    """
    a = np.array(values, dtype=dtype, copy=True)
    size = a.shape[-1]
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    h = 1
    lead = a.shape[:-1]
    while h < size:
        a = a.reshape(*lead, size // (2 * h), 2, h)
        x = a[..., 0, :].copy()
        y = a[..., 1, :]
        a[..., 0, :] = x + y
        a[..., 1, :] = x - y
        a = a.reshape(*lead, size)
        h *= 2
    return a


def popcount(x):
    return np.bitwise_count(np.asarray(x, dtype=np.uint64)).astype(np.int64)


def int_to_bits(value, width):
    """Big-endian bit array of ``value``."""
    return np.array([(value >> (width - 1 - j)) & 1 for j in range(width)], dtype=np.uint8)


def bits_to_int(bits):
    out = 0
    for b in np.asarray(bits).ravel():
        out = (out << 1) | int(b)
    return out


def parse_seed(seed):
    """Accept an int, a hex string (optionally ``0x``-prefixed) or bytes."""
    if isinstance(seed, (int, np.integer)):
        return int(seed), None
    if isinstance(seed, (bytes, bytearray)):
        return int.from_bytes(seed, "big"), 8 * len(seed)
    text = str(seed).strip().lower()
    if text.startswith("0x"):
        text = text[2:]
    if not text:
        raise ValueError("empty seed")
    return int(text, 16), 4 * len(text)
