"""Weighted graphs as random walks: conductance and balanced separators.

A graph is any object with ``weights`` (symmetric, nonnegative, summing to 1:
the law of a stationary edge) and ``stationary`` (its row sums).
"""

from dataclasses import dataclass, field

import numpy as np

from ._util import as_rng
from .errors import InfeasibleError, ParameterError

BRUTE_FORCE_CAP = 24
MASS_TOL = 1e-12


class WeightedGraph:
    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ParameterError("weights must be a square matrix")
        if np.any(w < 0) or not np.allclose(w, w.T, rtol=0, atol=1e-15):
            raise ParameterError("weights must be symmetric and nonnegative")
        total = w.sum()
        if total <= 0:
            raise ParameterError("graph has no edges")
        self.weights = w / total
        self.stationary = self.weights.sum(axis=1)

    @classmethod
    def from_edges(cls, n_vertices, edges, weight=1.0):
        w = np.zeros((n_vertices, n_vertices))
        for u, v in edges:
            w[u, v] += weight
            w[v, u] += weight
        return cls(w)

    @property
    def n_vertices(self):
        return len(self.stationary)


def _as_mask(S, n):
    S = np.asarray(S)
    if S.dtype == bool:
        if S.shape != (n,):
            raise ParameterError("boolean vertex mask has the wrong length")
        return S.copy()
    mask = np.zeros(n, dtype=bool)
    mask[S.astype(int)] = True
    return mask


def cut_weight(graph, S):
    """Stationary probability that an edge starts in S and ends outside it."""
    s = _as_mask(S, len(graph.stationary)).astype(float)
    return float(s @ graph.weights @ (1.0 - s))


def conductance(graph, S):
    """P(step leaves S | start in S) for a stationary start in S."""
    mask = _as_mask(S, len(graph.stationary))
    if not mask.any() or mask.all():
        raise ParameterError("S must be a nonempty proper subset")
    mass = float(graph.stationary[mask].sum())
    if mass == 0:
        raise ParameterError("S has zero stationary mass")
    return cut_weight(graph, mask) / mass


@dataclass
class SeparatorResult:
    phi: float
    witness: np.ndarray
    mass: float
    exact: bool
    feasible: bool = True
    candidates: list = field(default_factory=list, repr=False)

    def as_dict(self):
        return {
            "phi": self.phi,
            "witness": [int(v) for v in np.flatnonzero(self.witness)],
            "mass": self.mass,
            "exact": self.exact,
            "feasible": self.feasible,
        }


def _subset_table(weights, pi, verts):
    m = len(verts)
    idx = np.arange(2**m)
    X = ((idx[:, None] >> np.arange(m)[None, :]) & 1).astype(float)
    sub = weights[np.ix_(verts, verts)]
    quad = np.einsum("ij,jk,ik->i", X, sub, X)
    return X, X @ pi[verts], quad


def _brute_force(graph, b):
    W, pi = graph.weights, graph.stationary
    n = len(pi)
    left = np.arange(n // 2)
    right = np.arange(n // 2, n)
    XL, massL, quadL = _subset_table(W, pi, left)
    XR, massR, quadR = _subset_table(W, pi, right)
    cross = XL @ W[np.ix_(left, right)] @ XR.T if len(left) and len(right) else None
    best = (np.inf, None, None)
    chunk = max(1, 2**22 // max(1, len(massR)))
    for start in range(0, len(massL), chunk):
        sl = slice(start, start + chunk)
        mass = massL[sl, None] + massR[None, :]
        inside = quadL[sl, None] + quadR[None, :]
        if cross is not None:
            inside = inside + 2 * cross[sl]
        ok = (mass >= b - MASS_TOL) & (mass <= 1 - b + MASS_TOL) & (mass > 0)
        phi = np.where(ok, (mass - inside) / np.where(ok, mass, 1.0), np.inf)
        flat = int(np.argmin(phi))
        val = phi.flat[flat]
        if val < best[0]:
            i, j = divmod(flat, phi.shape[1])
            best = (float(val), start + i, j)
    if best[1] is None:
        return None
    _, i, j = best
    mask = np.zeros(n, dtype=bool)
    mask[left] = XL[i].astype(bool)
    mask[right] = XR[j].astype(bool)
    return mask


def _feasible(mass, b):
    return b - MASS_TOL <= mass <= 1 - b + MASS_TOL


def _local_search(graph, mask, b, max_passes=200):
    W, pi = graph.weights, graph.stationary
    s = mask.astype(float)
    diag = np.diag(W)
    mass = float(pi @ s)
    cut = float(s @ W @ (1 - s))
    for _ in range(max_passes):
        to_s = W @ s
        # cut change for flipping each vertex
        delta = np.where(s > 0, 2 * (to_s - diag) - pi + diag, pi - diag - 2 * to_s)
        new_mass = mass + np.where(s > 0, -pi, pi)
        ok = (new_mass >= b - MASS_TOL) & (new_mass <= 1 - b + MASS_TOL) & (new_mass > 0)
        phi_new = np.where(ok, (cut + delta) / np.where(ok, new_mass, 1.0), np.inf)
        v = int(np.argmin(phi_new))
        if not phi_new[v] < cut / mass - 1e-15:
            break
        s[v] = 1 - s[v]
        mass = float(new_mass[v])
        cut = float(cut + delta[v])
    return s > 0


def _spectral_candidates(graph, b, n_vectors=6):
    W, pi = graph.weights, graph.stationary
    safe = np.where(pi > 0, pi, 1.0)
    d = 1 / np.sqrt(safe)
    A = d[:, None] * W * d[None, :]
    vals, vecs = np.linalg.eigh(A)
    out = []
    for j in range(2, min(n_vectors + 2, len(vals) + 1)):
        f = vecs[:, -j] * d
        for sign in (1, -1):
            order = np.argsort(sign * f, kind="stable")
            cum = np.cumsum(pi[order])
            for cut_at in np.flatnonzero((cum >= b - MASS_TOL) & (cum <= 1 - b + MASS_TOL)):
                mask = np.zeros(len(pi), dtype=bool)
                mask[order[: cut_at + 1]] = True
                out.append(mask)
    return out


def _random_balanced(pi, b, rng):
    order = rng.permutation(len(pi))
    cum = np.cumsum(pi[order])
    target = rng.uniform(b, 1 - b)
    k = int(np.searchsorted(cum, target)) + 1
    mask = np.zeros(len(pi), dtype=bool)
    mask[order[:k]] = True
    return mask


def balanced_separator_opt(graph, b, cap=BRUTE_FORCE_CAP, candidates=None, restarts=32, random_state=0):
    """min conductance over vertex sets of stationary mass in [b, 1-b].

    Exhaustive up to ``cap`` vertices.  Above it, spectral sweep cuts, random
    balanced sets and any supplied ``candidates`` are refined by single-vertex
    local search; the result is then flagged ``exact=False``.  Raises
    :class:`InfeasibleError` when no set has admissible mass.
    """
    if not 0 < b <= 0.5:
        raise ParameterError("b must lie in (0, 1/2]")
    n = len(graph.stationary)
    if n <= cap:
        mask = _brute_force(graph, b)
        if mask is None:
            raise InfeasibleError(f"no vertex set has stationary mass in [{b}, {1 - b}]")
        return SeparatorResult(
            phi=conductance(graph, mask), witness=mask, mass=float(graph.stationary[mask].sum()), exact=True
        )
    rng = as_rng(random_state)
    pool = [np.asarray(c, dtype=bool) for c in (candidates or [])]
    pool += _spectral_candidates(graph, b)
    pool += [_random_balanced(graph.stationary, b, rng) for _ in range(restarts)]
    pool = [m for m in pool if m.any() and not m.all() and _feasible(graph.stationary[m].sum(), b)]
    if not pool:
        raise InfeasibleError(f"no candidate set has stationary mass in [{b}, {1 - b}]")
    scored = sorted(pool, key=lambda m: conductance(graph, m))
    refined = [_local_search(graph, m, b) for m in scored[: max(8, restarts // 2)]]
    found = refined + [np.asarray(c, dtype=bool) for c in (candidates or []) if _feasible(graph.stationary[np.asarray(c, dtype=bool)].sum(), b)]
    best = min(found, key=lambda m: conductance(graph, m))
    return SeparatorResult(
        phi=conductance(graph, best),
        witness=best,
        mass=float(graph.stationary[best].sum()),
        exact=False,
        candidates=refined,
    )
