"""Dense complex linear algebra used by every other module.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Tensor products
follow the big-endian convention: in ``tensor(a, b)`` the row index is
``i_a * dim_b + i_b``, so the first factor is the most significant digit.
"""

from __future__ import annotations

import os
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DimensionOverflow,
    MalformedDocument,
    NotHermitian,
    NumericalFailure,
    ValidationError,
)

DEFAULT_DIM_CAP = 4096
DIM_CAP_ENV = "COHERASE_DIM_CAP"

HERMITIAN_TOL = 1e-10
# eigenvalues closer than this are treated as one degenerate cluster
_DEGENERACY_TOL = 1e-9


def dim_cap() -> int:
    """Current dimension cap; the environment variable overrides the default."""
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError as exc:
        raise ValidationError(f"{DIM_CAP_ENV}={raw!r} is not an integer") from exc
    if cap < 1:
        raise ValidationError(f"{DIM_CAP_ENV} must be positive, got {cap}")
    return cap


def check_dim(dim: int, cap: int | None = None) -> None:
    cap = dim_cap() if cap is None else cap
    if dim > cap:
        raise DimensionOverflow(f"dimension {dim} exceeds cap {cap}")


def as_matrix(m) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    return a


def as_square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def hermiticity_error(m) -> float:
    a = as_square(m)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - a.conj().T)))


def require_hermitian(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    a = as_square(m)
    err = hermiticity_error(a)
    if err > tol:
        raise NotHermitian(f"max |m - m^dagger| = {err:.3e} exceeds {tol:.1e}")
    return a


class Spectrum(NamedTuple):
    """Descending eigenvalues and the matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc


def eigvalsh(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix."""
    a = require_hermitian(m, tol)
    a = 0.5 * (a + a.conj().T)
    try:
        return np.linalg.eigvalsh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix with a reproducible ordering.

    Eigenvalues come out descending.  Within a cluster of (numerically)
    degenerate eigenvalues the columns are ordered by descending
    lexicographic comparison of their absolute values, and every column's
    first non-negligible entry is rotated to be real and positive.
    """
    a = require_hermitian(m, tol)
    a = 0.5 * (a + a.conj().T)
    w, v = _eigh(a)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()

    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-9)
        if nz.size:
            ph = col[nz[0]] / abs(col[nz[0]])
            v[:, j] = col / ph

    order: list[int] = []
    start = 0
    dim = len(w)
    while start < dim:
        stop = start + 1
        while stop < dim and w[stop - 1] - w[stop] < _DEGENERACY_TOL:
            stop += 1
        block = list(range(start, stop))
        if len(block) > 1:
            keys = {j: tuple(-np.round(np.abs(v[:, j]), 9)) for j in block}
            block.sort(key=lambda j: keys[j])
        order.extend(block)
        start = stop
    return Spectrum(w[order], v[:, order])


def tensor(a, b, cap: int | None = None) -> np.ndarray:
    """Kronecker product, first factor most significant."""
    a = as_matrix(a)
    b = as_matrix(b)
    check_dim(max(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]), cap)
    return np.kron(a, b)


def tensor_all(factors: Sequence, cap: int | None = None) -> np.ndarray:
    if not factors:
        raise ValidationError("need at least one factor")
    return reduce(lambda x, y: tensor(x, y, cap), factors)


def tensor_power(a, n: int, cap: int | None = None) -> np.ndarray:
    """``a`` tensored with itself ``n`` times."""
    if n < 1:
        raise ValidationError(f"tensor power needs n >= 1, got {n}")
    a = as_matrix(a)
    check_dim(max(a.shape) ** n, cap)
    return tensor_all([a] * n, cap)


def partial_trace(m, dims: tuple[int, int], keep: int = 0) -> np.ndarray:
    """Reduced operator on factor ``keep`` (0 or 1) of a bipartite operator."""
    a = as_square(m)
    da, db = (int(x) for x in dims)
    if da < 1 or db < 1 or a.shape[0] != da * db:
        raise DimensionMismatch(f"matrix of size {a.shape[0]} does not split as {da}x{db}")
    t = a.reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ijkj->ik", t)
    if keep == 1:
        return np.einsum("ijil->jl", t)
    raise ValidationError(f"keep must be 0 or 1, got {keep!r}")


def purify(rho) -> np.ndarray:
    """Purification ``sum_i sqrt(l_i) |i>_S |i>_Z`` as a vector of length d**2."""
    spec = hermitian_eig(rho)
    lam = np.clip(spec.eigenvalues, 0.0, None)
    d = len(lam)
    # psi[s, z] = sum_i sqrt(l_i) v_i[s] delta(i, z)
    psi = spec.eigenvectors * np.sqrt(lam)[None, :]
    return psi.reshape(d * d)


def trace_norm(m) -> float:
    """Sum of singular values; uses the eigenvalues when ``m`` is Hermitian."""
    a = as_square(m)
    if a.size == 0:
        return 0.0
    if hermiticity_error(a) <= HERMITIAN_TOL:
        h = 0.5 * (a + a.conj().T)
        try:
            return float(np.sum(np.abs(np.linalg.eigvalsh(h))))
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(str(exc)) from exc
    try:
        return float(np.sum(np.linalg.svd(a, compute_uv=False)))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(str(exc)) from exc


def psd_sqrt(m, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Spectral square root of a positive semidefinite matrix."""
    a = require_hermitian(m, tol)
    w, v = _eigh(0.5 * (a + a.conj().T))
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def is_unitary(u, tol: float = 1e-9) -> bool:
    u = as_square(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))) <= tol


def max_abs(m) -> float:
    a = np.asarray(m)
    return float(np.max(np.abs(a))) if a.size else 0.0


def matrix_to_doc(m) -> dict:
    """Interchange form: ``{"dim_rows", "dim_cols", "entries": [[re, im], ...]}``."""
    a = as_matrix(m)
    return {
        "dim_rows": int(a.shape[0]),
        "dim_cols": int(a.shape[1]),
        "entries": [[float(z.real), float(z.imag)] for z in a.reshape(-1)],
    }


def matrix_from_doc(doc: dict) -> np.ndarray:
    try:
        rows = int(doc["dim_rows"])
        cols = int(doc["dim_cols"])
        entries = doc["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedDocument(f"matrix document missing or bad field: {exc}") from exc
    if rows < 1 or cols < 1:
        raise MalformedDocument("dim_rows and dim_cols must be positive")
    if not isinstance(entries, list) or len(entries) != rows * cols:
        n = len(entries) if isinstance(entries, list) else "non-list"
        raise MalformedDocument(f"expected {rows * cols} entries, got {n}")
    try:
        flat = np.array([complex(float(re), float(im)) for re, im in entries])
    except (TypeError, ValueError) as exc:
        raise MalformedDocument(f"entries must be [re, im] pairs: {exc}") from exc
    a = flat.reshape(rows, cols)
    if not np.all(np.isfinite(a)):
        raise MalformedDocument("non-finite entry")
    return a
