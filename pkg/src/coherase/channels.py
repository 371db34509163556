"""Random-unitary channels, incoherent unitaries and entropy exchange."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import numkernel as nk
from .errors import DimensionMismatch, MalformedDocument, NumericalFailure, ValidationError
from .states import as_rng, shannon_entropy, validate_state, von_neumann_entropy

PROB_TOL = 1e-10
UNITARY_TOL = 1e-9
CHAIN_TOL = 1e-9
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class UnitaryEnsemble:
    """Weighted unitaries ``{p_i, U_i}`` defining ``rho -> sum p_i U_i rho U_i^dagger``."""

    probs: np.ndarray
    unitaries: np.ndarray  # shape (N, d, d)
    incoherent: bool = field(init=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        u = np.asarray(self.unitaries, dtype=np.complex128)
        if u.ndim == 2:
            u = u[None]
        if u.ndim != 3 or u.shape[1] != u.shape[2]:
            raise DimensionMismatch(f"unitaries must have shape (N, d, d), got {u.shape}")
        if len(p) != u.shape[0] or len(p) == 0:
            raise DimensionMismatch(f"{len(p)} probabilities for {u.shape[0]} unitaries")
        if np.any(p < 0) or abs(p.sum() - 1.0) > PROB_TOL:
            raise ValidationError("probabilities must be nonnegative and sum to 1")
        eye = np.eye(u.shape[1])
        dev = np.max(np.abs(np.einsum("nji,njk->nik", u.conj(), u) - eye))
        if dev > UNITARY_TOL:
            raise ValidationError(f"member is not unitary (deviation {dev:.2e})")
        p.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "unitaries", u)
        object.__setattr__(self, "incoherent", all(factor_incoherent(x) is not None for x in u))

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    @property
    def size(self) -> int:
        return self.unitaries.shape[0]

    @classmethod
    def uniform(cls, unitaries) -> "UnitaryEnsemble":
        u = np.asarray(unitaries, dtype=np.complex128)
        return cls(np.full(u.shape[0], 1.0 / u.shape[0]), u)


@dataclass(frozen=True)
class IncoherentUnitary:
    """``U = V Pi``: permutation ``Pi|j> = |perm[j]>`` followed by ``V = diag(exp(i phases))``."""

    permutation: tuple[int, ...]
    phases: tuple[float, ...]

    def __post_init__(self):
        perm = tuple(int(x) for x in self.permutation)
        if sorted(perm) != list(range(len(perm))):
            raise ValidationError(f"{perm} is not a permutation")
        if len(self.phases) != len(perm):
            raise DimensionMismatch("phases and permutation lengths differ")
        ph = tuple(float(np.mod(x, TWO_PI)) for x in self.phases)
        object.__setattr__(self, "permutation", perm)
        object.__setattr__(self, "phases", ph)

    @property
    def dim(self) -> int:
        return len(self.permutation)

    def to_matrix(self) -> np.ndarray:
        return incoherent_to_matrix(self)

    def compose(self, other: "IncoherentUnitary") -> "IncoherentUnitary":
        """``self @ other``: apply ``other`` first."""
        if other.dim != self.dim:
            raise DimensionMismatch("dimension mismatch in compose")
        pa, pb = np.array(self.permutation), np.array(other.permutation)
        inv_a = np.argsort(pa)
        phases = np.array(self.phases) + np.array(other.phases)[inv_a]
        return IncoherentUnitary(tuple(pa[pb]), tuple(phases))

    def inverse(self) -> "IncoherentUnitary":
        p = np.array(self.permutation)
        return IncoherentUnitary(tuple(np.argsort(p)), tuple(-np.array(self.phases)[p]))


def incoherent_to_matrix(u: IncoherentUnitary) -> np.ndarray:
    """Matrix with ``exp(i phase[perm[j]])`` at ``(perm[j], j)``."""
    d = u.dim
    m = np.zeros((d, d), dtype=np.complex128)
    perm = np.array(u.permutation)
    m[perm, np.arange(d)] = np.exp(1j * np.array(u.phases)[perm])
    return m


def random_incoherent(d: int, seed=None) -> IncoherentUnitary:
    rng = as_rng(seed)
    return IncoherentUnitary(tuple(rng.permutation(d)), tuple(rng.uniform(0.0, TWO_PI, d)))


def factor_incoherent(u, tol: float = UNITARY_TOL) -> IncoherentUnitary | None:
    """Factor a unitary as phases times permutation, or ``None`` if impossible."""
    u = nk.as_square(u)
    d = u.shape[0]
    mags = np.abs(u)
    perm = np.argmax(mags, axis=0)
    if sorted(perm.tolist()) != list(range(d)):
        return None
    if np.max(np.abs(mags[perm, np.arange(d)] - 1.0)) > tol:
        return None
    mask = np.ones_like(mags, dtype=bool)
    mask[perm, np.arange(d)] = False
    if np.any(mags[mask] > tol):
        return None
    phases = np.empty(d)
    phases[perm] = np.angle(u[perm, np.arange(d)])
    return IncoherentUnitary(tuple(perm.tolist()), tuple(phases))


def apply_ensemble(e: UnitaryEnsemble, rho) -> np.ndarray:
    """``sum_i p_i U_i rho U_i^dagger``."""
    a = validate_state(rho)
    _match(e, a)
    out = np.einsum("n,nij,jk,nlk->il", e.probs, e.unitaries, a, e.unitaries.conj(), optimize=True)
    return 0.5 * (out + out.conj().T)


def _match(e: UnitaryEnsemble, a: np.ndarray) -> None:
    if a.shape[0] != e.dim:
        raise DimensionMismatch(f"ensemble dim {e.dim} does not match state dim {a.shape[0]}")


def weyl_operator(d: int, k: int, j: int) -> np.ndarray:
    """``X^k Z^j`` built directly: column ``m`` holds ``w^(j m)`` at row ``m + k``."""
    m = np.arange(d)
    out = np.zeros((d, d), dtype=np.complex128)
    out[(m + k) % d, m] = np.exp(TWO_PI * 1j * j * m / d)
    return out


def weyl_ensemble(d: int) -> UnitaryEnsemble:
    """The ``d**2`` shift-clock products, uniformly weighted."""
    if d < 2:
        raise ValidationError("weyl_ensemble needs d >= 2")
    us = np.array([weyl_operator(d, k, j) for k in range(d) for j in range(d)])
    return UnitaryEnsemble.uniform(us)


def z_dephasing_ensemble(d: int) -> UnitaryEnsemble:
    """Powers of the clock operator, uniformly weighted; averages to dephasing."""
    if d < 2:
        raise ValidationError("z_dephasing_ensemble needs d >= 2")
    return UnitaryEnsemble.uniform(np.array([weyl_operator(d, 0, j) for j in range(d)]))


def tensor_ensemble(a: UnitaryEnsemble, b: UnitaryEnsemble, cap: int | None = None) -> UnitaryEnsemble:
    """Product channel: members ``U_i (x) V_j`` with weights ``p_i q_j``."""
    nk.check_dim(a.dim * b.dim, cap)
    probs = np.outer(a.probs, b.probs).reshape(-1)
    us = np.array([np.kron(u, v) for u in a.unitaries for v in b.unitaries])
    return UnitaryEnsemble(probs / probs.sum(), us)


def exchange_matrix(e: UnitaryEnsemble, rho) -> np.ndarray:
    """``W_ij = sqrt(p_i p_j) Tr(U_i rho U_j^dagger)``: the environment's state."""
    a = validate_state(rho)
    _match(e, a)
    ur = e.unitaries @ a
    w = np.einsum("iab,jab->ij", ur, e.unitaries.conj(), optimize=True)
    s = np.sqrt(e.probs)
    w = s[:, None] * w * s[None, :]
    return 0.5 * (w + w.conj().T)


def entropy_exchange(e: UnitaryEnsemble, rho) -> float:
    return von_neumann_entropy(exchange_matrix(e, rho))


def entropy_exchange_via_purification(e: UnitaryEnsemble, rho, cap: int | None = None) -> float:
    """Entropy of ``(R (x) id_Z)`` applied to a purification of ``rho``."""
    a = validate_state(rho)
    _match(e, a)
    d = a.shape[0]
    nk.check_dim(d * d, cap)
    psi = nk.purify(a)
    pure = np.outer(psi, psi.conj())
    eye = np.eye(d)
    out = np.zeros_like(pure)
    for p, u in zip(e.probs, e.unitaries):
        big = np.kron(u, eye)
        out += p * big @ pure @ big.conj().T
    return von_neumann_entropy(0.5 * (out + out.conj().T))


def ensemble_entropy_bounds(e: UnitaryEnsemble, rho) -> tuple[float, float, float]:
    """``(H_e, H(p), log2 N)``; raises if the chain ``H_e <= H(p) <= log2 N`` breaks."""
    h_e = entropy_exchange(e, rho)
    h_p = shannon_entropy(e.probs)
    log_n = float(np.log2(e.size))
    if not (h_e <= h_p + CHAIN_TOL and h_p <= log_n + CHAIN_TOL):
        raise NumericalFailure(f"entropy chain violated: H_e={h_e}, H(p)={h_p}, log N={log_n}")
    return h_e, h_p, log_n


def ensemble_to_doc(e: UnitaryEnsemble) -> dict:
    return {
        "dim": e.dim,
        "members": [
            {"p": float(p), "unitary": nk.matrix_to_doc(u)} for p, u in zip(e.probs, e.unitaries)
        ],
    }


def ensemble_from_doc(doc: dict) -> UnitaryEnsemble:
    try:
        dim = int(doc["dim"])
        members: Sequence[dict] = doc["members"]
        probs = [float(m["p"]) for m in members]
        us = [nk.matrix_from_doc(m["unitary"]) for m in members]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDocument(f"bad ensemble document: {exc}") from exc
    if not us or any(u.shape != (dim, dim) for u in us):
        raise MalformedDocument(f"every unitary must be {dim}x{dim}")
    return UnitaryEnsemble(np.array(probs), np.array(us))
