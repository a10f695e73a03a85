"""Clouds of tensor powers over affine-shift orbits and the lifted SDP solution.

A cloud B(v) is the set of unit vectors (s(pi_b v)/sqrt N)^{(x)3} over the
orbit of v, where s(w) = 1 - 2w is the +-1 view of a word.  Everything is
computed from inner products, so no tensor is ever formed: the normalized
inner product of two cloud sums at tensor power t is

    S(u, v) / sqrt(S(u, u) S(v, v)),   S(u, v) = sum_b (<u, pi_b v> / N)^{3t},

where the sum runs over all shifts (stabilizer multiplicities cancel).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .codes import RMCode
from .errors import ParameterError


class NotNearlyOrthogonal(UserWarning):
    pass


def signed(words):
    return 1 - 2 * np.asarray(words, dtype=np.int64)


def _n_of(word):
    N = np.asarray(word).shape[-1]
    n = N.bit_length() - 1
    if 2**n != N:
        raise ParameterError("word length must be a power of two")
    return n, N


def shift_correlations(v):
    """<s(v), s(pi_b v)> for every shift b (b = 0 first)."""
    n, N = _n_of(v)
    s = signed(v)
    idx = np.arange(N)
    shifted = s[..., idx[:, None] ^ idx[None, :]]  # [..., b, x] = s(v)(x + b)
    return (shifted * s[..., None, :]).sum(axis=-1)


def near_orthogonality_threshold(N):
    return N ** (2 / 3) / 2


def near_orthogonality(v):
    """max over nonzero shifts b of |<v, pi_b v>|, against N^{2/3}/2."""
    _, N = _n_of(v)
    corr = np.abs(shift_correlations(v)[..., 1:])
    max_corr = corr.max(axis=-1)
    thr = near_orthogonality_threshold(N)
    if np.ndim(max_corr) == 0:
        return {"ok": bool(max_corr <= thr), "max_corr": int(max_corr), "threshold": thr}
    return {"ok": max_corr <= thr, "max_corr": max_corr, "threshold": thr}


def near_orthogonal_fraction(n, d):
    """Exact fraction of RM(n, d) whose clouds are nearly orthogonal."""
    words = RMCode(n, d).codewords()
    return float(np.mean(near_orthogonality(words)["ok"]))


def orbit_members(v):
    """Distinct words pi_b(v), in order of first appearance over b."""
    _, N = _n_of(v)
    idx = np.arange(N)
    shifted = np.asarray(v)[idx[:, None] ^ idx[None, :]]
    _, first = np.unique(shifted, axis=0, return_index=True)
    return shifted[np.sort(first)]


def cloud_gram_eigen_bound(v, require_near_orthogonal=True):
    """Largest eigenvalue of the cloud Gram M_ab = <pi_a v, pi_b v>^3 / N^3.

    That eigenvalue is the maximum over unit w of sum_{u in B(v)} <w, u>^2.
    """
    _, N = _n_of(v)
    check = near_orthogonality(v)
    if require_near_orthogonal and not check["ok"]:
        raise ParameterError("cloud is not nearly orthogonal; the eigenvalue bound is not claimed")
    s = signed(orbit_members(v))
    M = (s @ s.T / N) ** 3
    top = float(np.linalg.eigvalsh(M)[-1])
    gershgorin = float(np.abs(M).sum(axis=1).max())
    return {
        "eigenvalue": top,
        "gershgorin": gershgorin,
        "members": len(s),
        "bound": 9 / 8,
        "ok": top <= 9 / 8 + 1e-12,
        "near_orthogonal": check["ok"],
    }


def matching_report(u, v):
    """Check that matching pi_r(u) to pi_r(pi_s v) realizes every argmax.

    ``s`` is the smallest shift maximizing |<u, pi_s v>|; a member reached by
    several shifts uses the smallest one.
    """
    _, N = _n_of(u)
    idx = np.arange(N)
    su, sv = signed(u), signed(v)
    # corr[r, b] = <pi_r u, pi_b v>
    U = su[idx[:, None] ^ idx[None, :]]
    V = sv[idx[:, None] ^ idx[None, :]]
    corr = np.abs(U @ V.T)
    sigma = int(np.argmax(corr[0]))
    passed = True
    seen = {}
    for r in range(N):
        key = U[r].tobytes()
        if key in seen:
            continue
        target = r ^ sigma
        seen[key] = V[target].tobytes()
        if corr[r, target] < corr[r].max():
            passed = False
    images = set(seen.values())
    return {"passed": passed, "sigma": sigma, "members": len(seen), "injective": len(images) == len(seen)}


def matching_audit(u, v):
    return matching_report(u, v)["passed"]


def _shift_sums(A, B, t_tensor):
    """S[i, j] = sum_b (<a_i, pi_b b_j> / N)^{3t} for signed rows A, B."""
    N = A.shape[1]
    idx = np.arange(N)
    out = np.zeros((A.shape[0], B.shape[0]))
    for b in range(N):
        out += (A @ B[:, idx ^ b].T / N) ** (3 * t_tensor)
    return out


def _check_tensor(t_tensor):
    if int(t_tensor) != t_tensor or t_tensor < 1 or t_tensor % 2 == 0:
        raise ParameterError(f"tensor power must be an odd positive integer, got {t_tensor}")
    return int(t_tensor)


def cloud_inner_matrix(words_a, words_b, t_tensor):
    """Normalized cloud-sum inner products for every pair of rows."""
    t = _check_tensor(t_tensor)
    A = signed(np.atleast_2d(words_a)).astype(float)
    B = signed(np.atleast_2d(words_b)).astype(float)
    S = _shift_sums(A, B, t)
    na = np.sqrt(np.diag(_shift_sums(A, A, t)))
    nb = np.sqrt(np.diag(_shift_sums(B, B, t)))
    # An orbit holding both w and its complement sums to zero under odd powers.
    if np.any(na < 1e-12) or np.any(nb < 1e-12):
        raise ParameterError("cloud sum vanishes: the orbit contains a word and its complement")
    return S / np.outer(na, nb)


def cloud_inner_product(u, v, t_tensor):
    """<sum B(u)^{(x)t}, sum B(v)^{(x)t}> after normalizing both sums."""
    for w in (u, v):
        if not near_orthogonality(w)["ok"]:
            warnings.warn("cloud is not nearly orthogonal", NotNearlyOrthogonal, stacklevel=2)
    return float(cloud_inner_matrix(u, v, t_tensor)[0, 0])


def perturbation_bound(t_tensor, rounds):
    """10 R^2 exp(-t / 16R)."""
    return 10 * rounds**2 * math.exp(-t_tensor / (16 * rounds))


def cloud_perturbation(t_tensor, rounds):
    """The bound clamped to 1, with a flag telling whether the clamp was needed."""
    delta = perturbation_bound(t_tensor, rounds)
    return min(1.0, delta), delta >= 1


@dataclass
class LiftedSolution:
    tensor_power: int
    rounds: int
    delta: float
    delta_raw: float
    vacuous: bool
    gram: np.ndarray
    good: np.ndarray
    base_cloud: int
    min_eigenvalue: float
    remapped: bool

    @property
    def size(self):
        return len(self.gram)


def lifted_gram(clouds, t_tensor, R, delta_override=None, tol=1e-8):
    """Gram of the perturbed cloud-sum vectors, one row per cloud.

    ``clouds`` holds one representative word per cloud.  Clouds that are not
    nearly orthogonal reuse the vector of the first good cloud B0, so their
    Gram entries with B0 (and with each other) are 1.  The orthogonal
    perturbation directions are mutually orthonormal, adding ``delta`` to the
    diagonal only.
    """
    t = _check_tensor(t_tensor)
    if R < 1:
        raise ParameterError("rounds must be >= 1")
    words = np.atleast_2d(np.asarray(clouds, dtype=np.uint8))
    clamped, vacuous = cloud_perturbation(t, R)
    delta = clamped if delta_override is None else float(delta_override)
    if not 0 <= delta <= 1:
        raise ParameterError("delta must lie in [0, 1]")
    good = np.asarray(near_orthogonality(words)["ok"], dtype=bool).reshape(len(words))
    if not good.any():
        raise ParameterError("no nearly-orthogonal cloud to remap onto; the code is too small")
    base = int(np.flatnonzero(good)[0])
    effective = np.where(good, np.arange(len(words)), base)
    distinct = np.unique(effective)
    C = cloud_inner_matrix(words[distinct], words[distinct], t)
    G = (1 - delta) * C
    np.fill_diagonal(G, 1.0)
    pos = np.searchsorted(distinct, effective)
    gram = G[np.ix_(pos, pos)]
    min_eig = float(np.linalg.eigvalsh(gram)[0])
    if min_eig < -tol:
        raise ParameterError(f"lifted Gram is not PSD: min eigenvalue {min_eig:.3e}")
    return LiftedSolution(
        tensor_power=t,
        rounds=R,
        delta=delta,
        delta_raw=perturbation_bound(t, R),
        vacuous=bool(vacuous and delta_override is None),
        gram=gram,
        good=good,
        base_cloud=base,
        min_eigenvalue=min_eig,
        remapped=bool((~good).any()),
    )


def realize(sol):
    """Rows whose Gram is ``sol.gram`` (via a symmetric eigendecomposition)."""
    vals, vecs = np.linalg.eigh(sol.gram)
    return vecs * np.sqrt(np.clip(vals, 0, None))[None, :]


def _check_aligned(sol, folded):
    if sol.size != folded.n_vertices:
        raise ParameterError("solution and folded graph have different vertex counts")


def balance_value(sol, folded):
    """E over independent stationary cloud pairs of ||v_B - v_B'||^2 / 4."""
    _check_aligned(sol, folded)
    pi = folded.stationary
    return float(pi @ ((2 - 2 * sol.gram) / 4) @ pi)


def sdp_objective(sol, folded):
    """Edge-weighted average of ||v_B - v_B'||^2 / 4."""
    _check_aligned(sol, folded)
    return float((folded.weights * (2 - 2 * sol.gram) / 4).sum())


def clouds_of(folded):
    """Representative codeword of each orbit of a folded graph."""
    return folded.parent.code.encode(folded.orbits.representatives)
