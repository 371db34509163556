"""Validated density matrices, named state families and entropy functionals.

All entropies are in bits.
"""

from __future__ import annotations

import numpy as np

from . import numkernel as nk
from .errors import DimensionMismatch, InvalidState, MalformedDocument, ParamOutOfRange

TRACE_TOL = 1e-10
NEG_EIG_TOL = 1e-10
UNIT_NORM_TOL = 1e-10


def as_rng(seed) -> np.random.Generator:
    """Accept an int, a ``SeedSequence`` or an existing ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def validate_state(rho) -> np.ndarray:
    """Return ``rho`` as a complex array after checking it is a density matrix.

    Raises:
        InvalidState: trace off by more than 1e-10 or an eigenvalue below -1e-10.
        NotHermitian: asymmetric beyond 1e-10.
    """
    a = nk.require_hermitian(rho)
    tr = np.trace(a)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidState(f"trace {tr.real:.12g} differs from 1")
    lo = nk.eigvalsh(a)[0] if a.size else 0.0
    if lo < -NEG_EIG_TOL:
        raise InvalidState(f"negative eigenvalue {lo:.3e}")
    return a


def clamp_spectrum(eigs) -> np.ndarray:
    """Zero eigenvalues in [-1e-10, 0); anything more negative is an error."""
    eigs = np.asarray(eigs, dtype=float)
    if eigs.size and eigs.min() < -NEG_EIG_TOL:
        raise InvalidState(f"negative eigenvalue {eigs.min():.3e}")
    return np.where(eigs < 0.0, 0.0, eigs)


def shannon_entropy(probs) -> float:
    p = clamp_spectrum(probs)
    p = p[p > 0.0]
    return float(-np.sum(p * np.log2(p))) if p.size else 0.0


def von_neumann_entropy(rho) -> float:
    """``-sum l log2 l`` over the eigenvalues of ``rho``."""
    a = validate_state(rho)
    return max(0.0, shannon_entropy(nk.eigvalsh(a)))


def pure_state(amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if abs(np.linalg.norm(v) - 1.0) > UNIT_NORM_TOL:
        raise InvalidState(f"state vector norm {np.linalg.norm(v):.12g} is not 1")
    return v


def projector(psi) -> np.ndarray:
    v = pure_state(psi)
    return np.outer(v, v.conj())


def maximally_coherent(d: int) -> np.ndarray:
    """Amplitude vector of the uniform superposition over ``d`` basis states."""
    if d < 1:
        raise ParamOutOfRange(f"d must be >= 1, got {d}")
    return np.full(d, 1.0 / np.sqrt(d), dtype=np.complex128)


def max_coherent_mixed(d: int, p: float) -> np.ndarray:
    """``(1 - p) I/d + p |psi_d><psi_d|``."""
    if not 0.0 <= p <= 1.0:
        raise ParamOutOfRange(f"p must lie in [0, 1], got {p}")
    return (1.0 - p) * np.eye(d, dtype=np.complex128) / d + p * projector(maximally_coherent(d))


def mutual_information(rho_ab, dims: tuple[int, int]) -> float:
    a = validate_state(rho_ab)
    _check_split(a, dims)
    h_a = von_neumann_entropy(nk.partial_trace(a, dims, keep=0))
    h_b = von_neumann_entropy(nk.partial_trace(a, dims, keep=1))
    return h_a + h_b - von_neumann_entropy(a)


def araki_lieb_check(rho_ab, dims: tuple[int, int]) -> tuple[float, float, bool]:
    """Return ``(|H(A) - H(B)|, H(AB), holds)``."""
    a = validate_state(rho_ab)
    _check_split(a, dims)
    h_a = von_neumann_entropy(nk.partial_trace(a, dims, keep=0))
    h_b = von_neumann_entropy(nk.partial_trace(a, dims, keep=1))
    lhs = abs(h_a - h_b)
    rhs = von_neumann_entropy(a)
    return lhs, rhs, rhs >= lhs - 1e-9


def _check_split(a: np.ndarray, dims) -> None:
    da, db = dims
    if a.shape[0] != da * db:
        raise DimensionMismatch(f"state of dim {a.shape[0]} is not {da}x{db}")


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_state(d: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Hilbert-Schmidt style random state ``G G^dagger / Tr(G G^dagger)``.

    ``G`` is ``d x rank`` with i.i.d. standard complex Gaussian entries drawn
    from ``seed``; the same seed reproduces the same matrix bit for bit.
    """
    rank = d if rank is None else rank
    if d < 1 or not 1 <= rank <= d:
        raise ParamOutOfRange(f"need 1 <= rank <= d, got d={d}, rank={rank}")
    g = complex_gaussian(as_rng(seed), (d, rank))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    return 0.5 * (m + m.conj().T)


def random_pure_state(d: int, seed=None) -> np.ndarray:
    """Haar-random amplitude vector."""
    v = complex_gaussian(as_rng(seed), d)
    return v / np.linalg.norm(v)


def state_to_doc(rho) -> dict:
    a = validate_state(rho)
    doc = {"dim": int(a.shape[0])}
    doc.update(nk.matrix_to_doc(a))
    return doc


def state_from_doc(doc: dict) -> np.ndarray:
    a = nk.matrix_from_doc(doc)
    if "dim" in doc and int(doc["dim"]) != a.shape[0]:
        raise MalformedDocument(f"dim {doc['dim']} disagrees with matrix size {a.shape[0]}")
    return validate_state(a)
