"""Coherence in the computational basis.

The reference basis is always the coordinate basis; to study another basis,
conjugate the state first.  Trace distances here carry no factor of 1/2.
"""

from __future__ import annotations

import numpy as np

from . import numkernel as nk
from .errors import ParamOutOfRange
from .states import as_rng, shannon_entropy, validate_state, von_neumann_entropy

OPT_MAX_DIM = 16


def dephase(rho) -> np.ndarray:
    """Keep only the diagonal of ``rho``."""
    a = validate_state(rho)
    return np.diag(np.diag(a))


def is_incoherent(rho, tol: float = 1e-9) -> bool:
    a = nk.as_square(rho)
    off = a - np.diag(np.diag(a))
    return nk.max_abs(off) <= tol


def relative_entropy_coherence(rho) -> float:
    """``H(diag(rho)) - H(rho)`` in bits, clipped at zero."""
    a = validate_state(rho)
    c = shannon_entropy(np.diag(a).real) - von_neumann_entropy(a)
    return max(0.0, c)


def l1_coherence(rho) -> float:
    a = validate_state(rho)
    return float(np.sum(np.abs(a)) - np.sum(np.abs(np.diag(a))))


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ParamOutOfRange(f"binary entropy needs x in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))


def incoherent_distance_witness(sigma) -> tuple[float, np.ndarray]:
    """Trace distance from ``sigma`` to its own diagonal, and that diagonal.

    The diagonal is a feasible incoherent state, so the distance is an upper
    bound on the distance to the incoherent set.
    """
    tau = dephase(sigma)
    return nk.trace_norm(nk.as_square(sigma) - tau), tau


def _project_simplex(v: np.ndarray) -> np.ndarray:
    # Euclidean projection onto the probability simplex (sort-based)
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    k = np.arange(1, len(v) + 1)
    rho = np.nonzero(u * k > css - 1.0)[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def incoherent_distance_opt(sigma, iters: int = 2000, seed=0) -> float:
    """Refine the witness by local search over diagonal states ``diag(q)``.

    Pattern search with shrinking steps along pairwise probability transfers,
    plus seeded random simplex directions, starting from ``diag(sigma)``.
    """
    a = validate_state(sigma)
    d = a.shape[0]
    if d > OPT_MAX_DIM:
        raise ParamOutOfRange(f"incoherent_distance_opt supports dim <= {OPT_MAX_DIM}, got {d}")
    if iters < 1:
        raise ParamOutOfRange("iters must be positive")
    rng = as_rng(seed)

    def objective(q: np.ndarray) -> float:
        return float(np.sum(np.abs(np.linalg.eigvalsh(a - np.diag(q)))))

    q = np.clip(np.diag(a).real, 0.0, None)
    q = q / q.sum()
    best = objective(q)
    witness = best
    if d == 1:
        return best

    pairs = [(i, j) for i in range(d) for j in range(d) if i != j]
    step = 0.25
    used = 0
    while used < iters and step > 1e-12:
        improved = False
        moves = [np.eye(d)[i] - np.eye(d)[j] for i, j in pairs]
        r = rng.standard_normal(d)
        moves.append(r - r.mean())
        for m in moves:
            cand = _project_simplex(q + step * m)
            val = objective(cand)
            used += 1
            if val < best - 1e-15:
                q, best, improved = cand, val, True
            if used >= iters:
                break
        if not improved:
            step *= 0.5
    return min(best, witness)
