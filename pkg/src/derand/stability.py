"""Fourier analysis of functions on RM(n, d): influences and noise stability.

Also the Gaussian stability curve Gamma_rho(mu) and the hypercube analogue
used as an oracle.
"""

import math
from functools import cached_property

import numpy as np
from scipy.special import ndtri, ndtr

from ._util import fwht, popcount
from .codes import RMCode
from .errors import CapExceeded, ParameterError
from .shortcode import _leaders

CUBE_MAX_DIM = 20


class CodeFunction:
    """A real function on RM(n, d) given by its values in message order."""

    def __init__(self, n, d, values):
        self.code = RMCode(n, d)
        self.n, self.d = n, d
        v = np.asarray(values, dtype=float)
        if v.shape != (self.code.size,):
            raise ParameterError(f"need {self.code.size} values, got shape {v.shape}")
        v.setflags(write=False)
        self.values = v

    @classmethod
    def from_callable(cls, n, d, fn):
        """Evaluate ``fn`` on each codeword (a length-N bit array)."""
        code = RMCode(n, d)
        return cls(n, d, [fn(w) for w in code.codewords()])

    @classmethod
    def lift(cls, folded, orbit_values):
        """Pull back a function on orbits of a folded graph."""
        parent = folded.parent
        return cls(parent.n, parent.d, folded.orbits.lift(orbit_values))

    @cached_property
    def fourier(self):
        """f_hat indexed by syndrome: E_x[f(x) chi(x)]."""
        out = fwht(self.values) / self.code.size
        out.setflags(write=False)
        return out

    @property
    def mean(self):
        return float(self.values.mean())

    @property
    def second_moment(self):
        return float((self.values**2).mean())


def influence(f, i, ell):
    """Low-degree influence of coordinate ``i`` (a point index, 0-based).

    A character counts when its coset degree is at most ``ell`` and its
    minimum-weight coset representative has bit ``i`` set.
    """
    N = f.code.length
    if not 0 <= i < N:
        raise ParameterError(f"coordinate must lie in [0, {N})")
    leaders, degrees = _leaders(f.n, f.d)
    has_i = (leaders >> (N - 1 - i)) & 1
    sel = (degrees <= ell) & (has_i == 1)
    return float((f.fourier[sel] ** 2).sum())


def influences(f, ell):
    N = f.code.length
    leaders, degrees = _leaders(f.n, f.d)
    weights = np.where(degrees <= ell, np.asarray(f.fourier) ** 2, 0.0)
    bits = (leaders[:, None] >> (N - 1 - np.arange(N))[None, :]) & 1
    return weights @ bits


def noise_stability(f, graph):
    """sum_alpha lambda_alpha f_hat(alpha)^2."""
    _check_same_code(f, graph)
    return float(np.asarray(graph.eigenvalues) @ (np.asarray(f.fourier) ** 2))


def noise_stability_direct(f, graph):
    """E_x[f(x) (Gf)(x)] by summing over every edge."""
    _check_same_code(f, graph)
    return float(f.values @ graph.weights @ f.values)


def _check_same_code(f, graph):
    if (f.n, f.d) != (graph.n, graph.d):
        raise ParameterError("function and graph live on different codes")


def _gauss_legendre(fn, a, b, nodes=20, tol=1e-13, max_panels=2**12):
    x, w = np.polynomial.legendre.leggauss(nodes)

    def composite(panels):
        edges = np.linspace(a, b, panels + 1)
        half = (edges[1:] - edges[:-1]) / 2
        mid = (edges[1:] + edges[:-1]) / 2
        pts = mid[:, None] + half[:, None] * x[None, :]
        return float((half[:, None] * w[None, :] * fn(pts)).sum())

    panels = 1
    prev = composite(panels)
    while panels < max_panels:
        panels *= 2
        cur = composite(panels)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    return prev


def gaussian_stability(rho, mu):
    """Gamma_rho(mu) = P[X <= t, Y <= t] for rho-correlated standard normals, Phi(t) = mu.

    Uses P = Phi(t)^2 + (1/2pi) int_0^{arcsin rho} exp(-t^2 / (1 + sin theta)) dtheta.
    The degenerate means mu = 0 and mu = 1 return 0 and 1; rho = 0 and rho = 1
    return their closed forms mu^2 and mu.
    """
    if not 0 <= rho <= 1:
        raise ParameterError("rho must lie in [0, 1]")
    if not 0 <= mu <= 1:
        raise ParameterError("mu must lie in [0, 1]")
    if mu in (0, 1) or rho == 1:
        return float(mu)
    if rho == 0:
        return float(mu) ** 2
    t = float(ndtri(mu))
    integral = _gauss_legendre(lambda th: np.exp(-(t**2) / (1 + np.sin(th))), 0.0, math.asin(rho))
    return float(ndtr(t) ** 2 + integral / (2 * math.pi))


def mis_audit(f, graph, tau):
    """Report noise stability against Gamma_rho(mu) under the low-influence hypothesis."""
    if not 0 < tau < 1:
        raise ParameterError("tau must lie in (0, 1)")
    ell = int(math.floor(math.log2(1 / tau)))
    infl = influences(f, ell)
    max_inf = float(infl.max())
    hypothesis = max_inf <= tau
    in_range = bool(f.values.min() >= 0 and f.values.max() <= 1)
    lhs = noise_stability(f, graph)
    rhs = gaussian_stability(graph.rho, min(1.0, max(0.0, f.mean)))
    return {
        "status": "ok" if hypothesis else "hypothesis not met",
        "hypothesis_met": bool(hypothesis),
        "tau": tau,
        "ell": ell,
        "max_influence": max_inf,
        "values_in_unit_interval": in_range,
        "mu": f.mean,
        "rho": graph.rho,
        "lhs": lhs,
        "rhs_main": rhs,
        "slack": lhs - rhs,
    }


def _cube_dim(values):
    size = len(values)
    m = size.bit_length() - 1
    if 2**m != size:
        raise ParameterError("cube function needs 2^m values")
    if m > CUBE_MAX_DIM:
        raise CapExceeded("cube dimension", m, CUBE_MAX_DIM)
    return m


def boolean_noise_stability(values, rho):
    """<f, T f> for the kernel rho^{d_H}(1 - rho)^{m - d_H} on {0,1}^m.

    That kernel scales chi_S by (1 - 2 rho)^{|S|}.
    """
    v = np.asarray(values, dtype=float)
    _cube_dim(v)
    coeffs = fwht(v) / len(v)
    sizes = popcount(np.arange(len(v)))
    return float(((1 - 2 * rho) ** sizes * coeffs**2).sum())


def boolean_noise_stability_direct(values, rho):
    v = np.asarray(values, dtype=float)
    m = _cube_dim(v)
    idx = np.arange(len(v))
    dist = popcount(idx[:, None] ^ idx[None, :])
    kernel = rho**dist * (1 - rho) ** (m - dist)
    return float(v @ kernel @ v / len(v))
