"""Weakly typical sets and subspaces, plus two inequality checkers.

Sequences over ``d`` symbols are identified with their big-endian flat index
``x_1 d^(n-1) + ... + x_n``, which is also their row in an ``n``-fold tensor
product.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import numkernel as nk
from .coherence import binary_entropy, dephase
from .errors import (
    DimensionMismatch,
    NotAMeasurementOperator,
    ParamOutOfRange,
    TooLarge,
    ValidationError,
    ZeroProbabilitySymbol,
)
from .states import clamp_spectrum, shannon_entropy, validate_state, von_neumann_entropy

MAX_SEQUENCES = 2**24
# slack on the window |H_bar - H| <= delta so exact ties (uniform spectra) count
WINDOW_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class ClassicalDistribution:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValidationError("probabilities must be nonnegative and sum to 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_spectrum(cls, eigs) -> "ClassicalDistribution":
        p = clamp_spectrum(eigs)
        return cls(p / p.sum())

    @cached_property
    def entropy(self) -> float:
        return shannon_entropy(self.probs)

    @property
    def size(self) -> int:
        return self.probs.size


def sample_entropy(seq: Sequence[int], p: ClassicalDistribution) -> float:
    """``-(1/n) sum log2 p(x_i)``."""
    seq = np.asarray(seq, dtype=int)
    if seq.size == 0:
        raise ValidationError("empty sequence")
    probs = p.probs[seq]
    if np.any(probs == 0.0):
        raise ZeroProbabilitySymbol("sequence contains a zero-probability symbol")
    return float(-np.mean(np.log2(probs)))


def sequence_log_probs(p: ClassicalDistribution, n: int) -> np.ndarray:
    """``log2 p(x^n)`` for every sequence, indexed big-endian."""
    if p.size**n > MAX_SEQUENCES:
        raise TooLarge(f"{p.size}^{n} sequences exceed the enumeration limit {MAX_SEQUENCES}")
    with np.errstate(divide="ignore"):
        logp = np.log2(p.probs)
    out = np.zeros(1)
    for _ in range(n):
        out = np.add.outer(out, logp).reshape(-1)
    return out


def index_to_sequence(index: int, d: int, n: int) -> tuple[int, ...]:
    digits = []
    for _ in range(n):
        index, r = divmod(int(index), d)
        digits.append(r)
    return tuple(reversed(digits))


def indices_to_digits(indices: np.ndarray, d: int, n: int) -> np.ndarray:
    """Rows of symbols, shape ``(len(indices), n)``."""
    idx = np.asarray(indices, dtype=np.int64)
    powers = d ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % d


@dataclass(frozen=True, eq=False)
class TypicalSet:
    n: int
    delta: float
    entropy: float
    indices: np.ndarray  # sorted flat indices of typical sequences
    mass: float
    d: int

    @property
    def size(self) -> int:
        return int(self.indices.size)

    def sequences(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in row) for row in indices_to_digits(self.indices, self.d, self.n)]

    def to_doc(self) -> dict:
        return {
            "n": self.n,
            "delta": self.delta,
            "H": self.entropy,
            "members": self.size,
            "mass": self.mass,
        }


def typical_set(p: ClassicalDistribution, n: int, delta: float) -> TypicalSet:
    """Exact enumeration of the sequences with ``|H_bar(x^n) - H| <= delta``."""
    if n < 1:
        raise ParamOutOfRange("n must be >= 1")
    if delta <= 0:
        raise ParamOutOfRange("delta must be positive")
    logp = sequence_log_probs(p, n)
    h = p.entropy
    finite = np.isfinite(logp)
    sample_h = np.where(finite, -logp / n, np.inf)
    members = np.flatnonzero(finite & (np.abs(sample_h - h) <= delta + WINDOW_SLACK))
    mass = float(np.sum(np.exp2(logp[members]))) if members.size else 0.0
    return TypicalSet(n, float(delta), h, members, mass, p.size)


@dataclass(frozen=True, eq=False)
class TypicalSubspace:
    """Span of the eigenbasis product vectors whose sequences are typical.

    ``basis`` holds those product vectors as columns, in the computational
    frame.  ``D`` and ``D_d`` are ``2^{n(H - delta)}`` and
    ``2^{n(H(diag rho) + delta)}``.
    """

    n: int
    delta: float
    base: ClassicalDistribution
    eigenvectors: np.ndarray
    typical: TypicalSet
    basis: np.ndarray
    D: float
    D_d: float

    @property
    def indices(self) -> np.ndarray:
        return self.typical.indices

    @property
    def dim_typ(self) -> int:
        return self.typical.size

    @property
    def full_dim(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    @property
    def coordinate_aligned(self) -> bool:
        """True when every basis column is a coordinate vector (up to phase)."""
        mags = np.abs(self.basis)
        return bool(np.all(np.abs(mags.max(axis=0) - 1.0) < 1e-12))

    @property
    def member_probs(self) -> np.ndarray:
        """Eigenvalues of the n-copy state on the typical vectors."""
        digits = indices_to_digits(self.indices, self.base.size, self.n)
        return np.prod(self.base.probs[digits], axis=1)


def product_columns(vectors: np.ndarray, digits: np.ndarray) -> np.ndarray:
    """Columns ``v[x_1] (x) ... (x) v[x_n]`` for each row of ``digits``."""
    d = vectors.shape[0]
    k, n = digits.shape
    cols = vectors[:, digits[:, 0]]
    for t in range(1, n):
        nxt = vectors[:, digits[:, t]]
        cols = (cols[:, None, :] * nxt[None, :, :]).reshape(cols.shape[0] * d, k)
    return cols


def typical_subspace(rho, n: int, delta: float, cap: int | None = None) -> TypicalSubspace:
    a = validate_state(rho)
    d = a.shape[0]
    nk.check_dim(d**n, cap)
    spec = nk.hermitian_eig(a)
    base = ClassicalDistribution.from_spectrum(spec.eigenvalues)
    ts = typical_set(base, n, delta)
    digits = indices_to_digits(ts.indices, d, n)
    if ts.size:
        basis = product_columns(spec.eigenvectors, digits)
    else:
        basis = np.zeros((d**n, 0), dtype=np.complex128)
    h_diag = shannon_entropy(np.diag(dephase(a)).real)
    return TypicalSubspace(
        n=n,
        delta=float(delta),
        base=base,
        eigenvectors=spec.eigenvectors,
        typical=ts,
        basis=basis,
        D=float(2.0 ** (n * (base.entropy - delta))),
        D_d=float(2.0 ** (n * (h_diag + delta))),
    )


def apply_local(rho: np.ndarray, vectors: np.ndarray, n: int) -> np.ndarray:
    """``rho^{(x) n}`` applied to the columns of ``vectors`` without forming it."""
    d = rho.shape[0]
    k = vectors.shape[1]
    t = vectors.reshape((d,) * n + (k,))
    for axis in range(n):
        t = np.moveaxis(np.tensordot(rho, t, axes=([1], [axis])), 0, axis)
    return t.reshape(d**n, k)


@dataclass(frozen=True)
class TypicalityReport:
    n: int
    delta: float
    entropy: float
    mass: float
    eps: float
    dim_typ: int
    dim_lower: float
    dim_upper: float
    dim_bounds_ok: bool
    eig_min: float
    eig_max: float
    sandwich_lower: float
    sandwich_upper: float
    sandwich_ok: bool
    block_residual: float

    @property
    def dim_slack(self) -> tuple[float, float]:
        return self.dim_typ - self.dim_lower, self.dim_upper - self.dim_typ


# explicit eigendecomposition of the pinched block up to this size
_EXPLICIT_BLOCK = 256


def typicality_properties(ts: TypicalSubspace, rho, eps: float | None = None) -> TypicalityReport:
    """Evaluate the mass, dimension window and eigenvalue sandwich.

    ``eps`` defaults to ``1 - mass``.  The sandwich is checked on the
    eigenvalues of ``Pi rho^{(x) n} Pi`` restricted to the typical block:
    computed explicitly for small blocks, and otherwise certified from the
    residual ``||rho^{(x)n} B - B diag(p)||`` together with the exact
    eigenvalues ``p``.
    """
    a = validate_state(rho)
    if a.shape[0] != ts.base.size:
        raise DimensionMismatch("state does not match the typical subspace")
    n, delta, h = ts.n, ts.delta, ts.base.entropy
    mass = ts.typical.mass
    eps = 1.0 - mass if eps is None else eps
    lower = (1.0 - eps) * 2.0 ** (n * (h - delta))
    upper = 2.0 ** (n * (h + delta))
    dim_ok = lower * (1 - 1e-12) <= ts.dim_typ <= upper * (1 + 1e-12)

    s_lo = 2.0 ** (-n * (h + delta))
    s_hi = 2.0 ** (-n * (h - delta))
    if ts.dim_typ == 0:
        return TypicalityReport(n, delta, h, mass, eps, 0, lower, upper, dim_ok,
                                float("nan"), float("nan"), s_lo, s_hi, True, 0.0)
    applied = apply_local(a, ts.basis, n)
    if ts.dim_typ <= _EXPLICIT_BLOCK:
        block = ts.basis.conj().T @ applied
        eigs = nk.eigvalsh(0.5 * (block + block.conj().T), tol=1e-9)
        residual = float(np.max(np.abs(block - np.diag(ts.member_probs))))
    else:
        eigs = ts.member_probs
        residual = float(np.max(np.abs(applied - ts.basis * eigs[None, :])))
    e_min, e_max = float(np.min(eigs)), float(np.max(eigs))
    sandwich_ok = (
        e_min >= s_lo * (1 - 1e-12) - 1e-12 and e_max <= s_hi * (1 + 1e-12) + 1e-12 and residual < 1e-9
    )
    return TypicalityReport(n, delta, h, mass, eps, ts.dim_typ, lower, upper, dim_ok,
                            e_min, e_max, s_lo, s_hi, sandwich_ok, residual)


def fannes_audenaert_check(rho, sigma) -> tuple[float, float, bool]:
    """``(|H(rho) - H(sigma)|, T log2(d-1) + H2(T), holds)`` with ``T`` half the trace distance."""
    a = validate_state(rho)
    b = validate_state(sigma)
    if a.shape != b.shape:
        raise DimensionMismatch("states have different dimensions")
    d = a.shape[0]
    t = min(1.0, 0.5 * nk.trace_norm(a - b))
    log_term = t * np.log2(d - 1) if d > 2 else 0.0
    bound = float(log_term + binary_entropy(t))
    delta_h = abs(von_neumann_entropy(a) - von_neumann_entropy(b))
    return delta_h, bound, bound >= delta_h - 1e-9


def gentle_operator_check(lam, rho) -> tuple[float, float, bool]:
    """``(eps, ||rho - sqrt(L) rho sqrt(L)||_1, holds)`` with ``eps = Tr rho - Tr(L rho)``."""
    l_op = nk.as_square(lam)
    a = nk.require_hermitian(rho)
    if l_op.shape != a.shape:
        raise DimensionMismatch("operator and state have different dimensions")
    try:
        w = nk.eigvalsh(l_op, tol=1e-9)
    except ValidationError as exc:
        raise NotAMeasurementOperator(str(exc)) from exc
    if w[0] < -1e-9 or w[-1] > 1 + 1e-9:
        raise NotAMeasurementOperator(f"eigenvalues of the operator span [{w[0]:.3e}, {w[-1]:.3e}]")
    eps = max(0.0, float(np.trace(a).real - np.trace(l_op @ a).real))
    root = nk.psd_sqrt(l_op, tol=1e-9)
    disturbance = nk.trace_norm(a - root @ a @ root)
    return eps, disturbance, disturbance <= 2.0 * np.sqrt(eps) + 1e-9
