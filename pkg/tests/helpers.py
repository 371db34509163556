"""Independent constructions used as oracles in the tests."""

import numpy as np


def rand_hermitian(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (g + g.conj().T)


def rand_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def rand_pure(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def rand_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def rand_probs(rng, n):
    p = rng.random(n) + 0.05
    return p / p.sum()


def h2(x):
    if x in (0.0, 1.0):
        return 0.0
    return -x * np.log2(x) - (1 - x) * np.log2(1 - x)


def entropy_bits(eigs):
    eigs = np.asarray(eigs, dtype=float)
    eigs = eigs[eigs > 1e-15]
    return float(-np.sum(eigs * np.log2(eigs)))


def vn_entropy(rho):
    return entropy_bits(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))


def schatten1(m):
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def incoherent_matrix(perm, phases):
    """Entry exp(i phase[perm[j]]) at row perm[j], column j."""
    d = len(perm)
    u = np.zeros((d, d), dtype=complex)
    for j in range(d):
        u[perm[j], j] = np.exp(1j * phases[perm[j]])
    return u
