"""Erasure experiments: the entropy-exchange lower bound, the sampled random
unitary eraser, operator Chernoff concentration, and finite-n rate curves.

Two frames are supported for the sampled eraser:

``"reference"`` (default)
    Twirl inside the typical subspace of the dephased state ``diag(rho)``.
    That subspace is spanned by computational basis vectors, so the target
    ``tau = Pi / dim(Pi)`` is incoherent and every sampled member is an
    incoherent unitary.

``"eigen"``
    Twirl inside the typical subspace of ``rho`` itself, in its eigenbasis.
    ``tau`` is then flat in the eigenbasis and generally *not* incoherent;
    for a pure state the subspace is one-dimensional and the sampled map is
    the identity.

Both distances (to ``tau`` and to ``diag(output)``) are always reported.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import numkernel as nk
from .channels import UnitaryEnsemble, apply_ensemble, entropy_exchange, weyl_operator
from .coherence import (
    binary_entropy,
    dephase,
    incoherent_distance_witness,
    is_incoherent,
    relative_entropy_coherence,
)
from .errors import NotIncoherentEnsemble, NotIncoherentOutput, ParamOutOfRange
from .states import as_rng, complex_gaussian, shannon_entropy, validate_state, von_neumann_entropy
from .typicality import TypicalSubspace, typical_subspace

FRAMES = ("reference", "eigen")
BOUND_TOL = 1e-9


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 0.5:
        raise ParamOutOfRange(f"eps must lie in (0, 1/2), got {eps}")


@dataclass(frozen=True, eq=False)
class ErasureBoundInput:
    rho: np.ndarray
    n: int
    eps: float

    def __post_init__(self):
        object.__setattr__(self, "rho", validate_state(self.rho))
        if self.n < 1:
            raise ParamOutOfRange("n must be >= 1")
        _check_eps(self.eps)

    @property
    def d(self) -> int:
        return self.rho.shape[0]


def single_copy_bound(rho, rho_i) -> float:
    """``H(rho_I) - H(rho)``; may be negative for mixed ``rho``."""
    if not is_incoherent(rho_i):
        raise NotIncoherentOutput("rho_I has off-diagonal entries above 1e-9")
    return von_neumann_entropy(rho_i) - von_neumann_entropy(rho)


def lemma1_bound(rho, n: int, eps: float) -> float:
    """``n (C_r - eps log2 d - H2(eps))``, unclamped."""
    a = validate_state(rho)
    if not 0.0 <= eps <= 1.0:
        raise ParamOutOfRange(f"eps must lie in [0, 1], got {eps}")
    d = a.shape[0]
    return n * (relative_entropy_coherence(a) - eps * math.log2(d) - binary_entropy(eps))


def _bound_eps(eps: float) -> float:
    # a witness above 1 makes the bound vacuous; evaluate it at the domain edge
    return min(eps, 1.0)


@dataclass(frozen=True)
class Lemma1Report:
    n: int
    d: int
    eps: float
    entropy_exchange: float
    bound: float
    holds: bool
    gap_to_dephased: float  # ||R(rho^n) - R_D||_1
    h_output: float
    h_dephased: float  # H(R_D)
    n_h_diag: float  # n H(diag rho)
    n_h_rho: float
    araki_lieb_ok: bool  # H_e >= H(output) - n H(rho)
    dephased_entropy_ok: bool  # H(R_D) >= n H(diag rho)


def verify_lemma1(e: UnitaryEnsemble, rho, n: int, cap: int | None = None) -> Lemma1Report:
    """Apply an incoherent ensemble to ``rho^{(x)n}`` and check the lower bound.

    The decoherence error is the dephasing witness of the output.
    """
    a = validate_state(rho)
    d = a.shape[0]
    if not e.incoherent:
        raise NotIncoherentEnsemble("every member must factor as phases times a permutation")
    big = nk.tensor_power(a, n, cap)
    out = apply_ensemble(e, big)
    eps, r_d = incoherent_distance_witness(out)
    h_e = entropy_exchange(e, big)
    bound = lemma1_bound(a, n, _bound_eps(eps))
    h_out = von_neumann_entropy(out)
    h_rd = von_neumann_entropy(r_d)
    n_h_diag = n * shannon_entropy(np.diag(a).real)
    n_h_rho = n * von_neumann_entropy(a)
    return Lemma1Report(
        n=n,
        d=d,
        eps=eps,
        entropy_exchange=h_e,
        bound=bound,
        holds=h_e >= bound - BOUND_TOL,
        gap_to_dephased=eps,
        h_output=h_out,
        h_dephased=h_rd,
        n_h_diag=n_h_diag,
        n_h_rho=n_h_rho,
        araki_lieb_ok=h_e >= h_out - n_h_rho - BOUND_TOL,
        dephased_entropy_ok=h_rd >= n_h_diag - BOUND_TOL,
    )


def haar_unitary(dim: int, seed=None) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix with phase fix."""
    if dim < 1:
        raise ParamOutOfRange("dim must be >= 1")
    z = complex_gaussian(as_rng(seed), (dim, dim))
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))[None, :]


def subspace_weyl_member(ts: TypicalSubspace, k: int, j: int) -> np.ndarray:
    """``B W B^dagger + (I - B B^dagger)`` with ``W = X^k Z^j`` on the typical block."""
    b = ts.basis
    w = weyl_operator(ts.dim_typ, k, j)
    u = (b @ w) @ b.conj().T
    u += np.eye(ts.full_dim) - ts.projector
    return u


def subspace_twirl_ensemble(ts: TypicalSubspace) -> UnitaryEnsemble:
    """All ``dim_typ**2`` embedded shift-clock operators, uniformly weighted."""
    if ts.dim_typ < 1:
        raise ParamOutOfRange("empty typical subspace")
    k = ts.dim_typ
    us = np.array([subspace_weyl_member(ts, a, b) for a in range(k) for b in range(k)])
    return UnitaryEnsemble.uniform(us)


def formula_ensemble_size(c_r: float, n: int, eps: float) -> int:
    """``ceil(2^{n (C_r + 3 eps)})``."""
    return int(math.ceil(2.0 ** (n * (c_r + 3.0 * eps)) - 1e-9))


@dataclass(frozen=True, eq=False)
class SampledEraser:
    base: ErasureBoundInput
    N: int
    seed: object
    frame: str
    subspace: TypicalSubspace
    members: np.ndarray  # (N, 2) shift/clock exponents, sampled i.i.d. uniform
    tau: np.ndarray

    @property
    def ensemble(self) -> UnitaryEnsemble:
        return self.prefix_ensemble(self.N)

    def prefix_ensemble(self, m: int) -> UnitaryEnsemble:
        """Uniform ensemble over the first ``m`` sampled members."""
        us = np.array([subspace_weyl_member(self.subspace, k, j) for k, j in self.members[:m]])
        return UnitaryEnsemble.uniform(us)

    @property
    def tau_incoherent(self) -> bool:
        return is_incoherent(self.tau, tol=1e-12)


def sample_eraser(
    rho, n: int, eps: float, seed=None, frame: str = "reference", N: int | None = None,
    cap: int | None = None,
) -> SampledEraser:
    """Sample ``N`` members uniformly and independently from the subspace twirl group.

    ``N`` defaults to ``ceil(2^{n(C_r + 3 eps)})`` and the typicality window
    is ``delta = eps``.
    """
    base = ErasureBoundInput(rho, n, eps)
    if frame not in FRAMES:
        raise ParamOutOfRange(f"frame must be one of {FRAMES}, got {frame!r}")
    nk.check_dim(base.d**n, cap)
    source = dephase(base.rho) if frame == "reference" else base.rho
    ts = typical_subspace(source, n, eps, cap)
    if ts.dim_typ == 0:
        raise ParamOutOfRange(f"typical subspace is empty at n={n}, delta={eps}")
    if N is None:
        N = formula_ensemble_size(relative_entropy_coherence(base.rho), n, eps)
    if N < 1:
        raise ParamOutOfRange("N must be >= 1")
    rng = as_rng(seed)
    members = rng.integers(0, ts.dim_typ, size=(N, 2))
    tau = ts.projector / ts.dim_typ
    return SampledEraser(base, int(N), seed, frame, ts, members, 0.5 * (tau + tau.conj().T))


REPORT_COLUMNS = (
    "n", "eps", "N", "seed", "frame", "kind", "dim_typ",
    "achieved_eps_tau", "achieved_eps_witness", "entropy_exchange",
    "lemma1_bound", "lemma1_holds", "incoherent_ensemble", "rate", "c_r",
)


@dataclass(frozen=True)
class ErasureReport:
    n: int
    eps: float
    N: int
    seed: int
    frame: str
    kind: str
    dim_typ: int
    achieved_eps_tau: float
    achieved_eps_witness: float
    entropy_exchange: float
    lemma1_bound: float
    lemma1_holds: bool
    incoherent_ensemble: bool
    rate: float
    c_r: float

    def row(self) -> dict:
        return asdict(self)


def _n_copy(se: SampledEraser, rho) -> np.ndarray:
    a = validate_state(rho)
    return nk.tensor_power(a, se.base.n)


def _distance_to_tau(se: SampledEraser, big: np.ndarray, m: int) -> tuple[float, np.ndarray]:
    e = se.prefix_ensemble(m)
    out = apply_ensemble(e, big)
    return nk.trace_norm(out - se.tau), out


def certified_eps(se: SampledEraser, eps_tau: float, eps_witness: float) -> float:
    """Smallest exhibited distance from the output to an incoherent state."""
    return min(eps_tau, eps_witness) if se.tau_incoherent else eps_witness


def verify_eraser(se: SampledEraser, rho, seed_label: int | None = None, kind: str = "formula",
                  m: int | None = None) -> ErasureReport:
    """Apply the sampled ensemble (or its first ``m`` members) to ``rho^{(x)n}``."""
    m = se.N if m is None else m
    big = _n_copy(se, rho)
    e = se.prefix_ensemble(m)
    out = apply_ensemble(e, big)
    eps_tau = nk.trace_norm(out - se.tau)
    eps_w, _ = incoherent_distance_witness(out)
    h_e = fast_entropy_exchange(e, big)
    cert = certified_eps(se, eps_tau, eps_w)
    bound = lemma1_bound(se.base.rho, se.base.n, _bound_eps(cert))
    label = seed_label if seed_label is not None else (se.seed if isinstance(se.seed, int) else -1)
    return ErasureReport(
        n=se.base.n,
        eps=se.base.eps,
        N=m,
        seed=int(label),
        frame=se.frame,
        kind=kind,
        dim_typ=se.subspace.dim_typ,
        achieved_eps_tau=eps_tau,
        achieved_eps_witness=eps_w,
        entropy_exchange=h_e,
        lemma1_bound=bound,
        lemma1_holds=h_e >= bound - BOUND_TOL,
        incoherent_ensemble=e.incoherent,
        rate=math.log2(m) / se.base.n,
        c_r=relative_entropy_coherence(se.base.rho),
    )


def fast_entropy_exchange(e: UnitaryEnsemble, rho: np.ndarray) -> float:
    """Same quantity as ``entropy_exchange``, with the overlap matrix as one matmul."""
    n_mem, d = e.size, e.dim
    left = (e.unitaries @ rho).reshape(n_mem, d * d)
    right = e.unitaries.reshape(n_mem, d * d)
    w = left @ right.conj().T
    s = np.sqrt(e.probs)
    w = s[:, None] * w * s[None, :]
    return von_neumann_entropy(0.5 * (w + w.conj().T))


# --- operator Chernoff ---------------------------------------------------------


@dataclass(frozen=True)
class ChernoffResult:
    dim: int
    a: float
    eps: float
    N: int
    trials: int
    successes: int
    empirical_success: float
    std_error: float
    bound: float
    family: str

    def row(self) -> dict:
        return asdict(self)


CHERNOFF_COLUMNS = ("family", "dim", "a", "eps", "N", "trials", "successes",
                    "empirical_success", "std_error", "bound")


def chernoff_bound(dim: int, a: float, eps: float, N: int) -> float:
    """``1 - 2 dim exp(-N eps^2 a / (4 ln 2))``."""
    return 1.0 - 2.0 * dim * math.exp(-N * eps * eps * a / (4.0 * math.log(2.0)))


def _interval_successes(samples: np.ndarray, mean: np.ndarray, eps: float, tol: float = 1e-12) -> int:
    """Count sample averages lying in ``[(1-eps) mean, (1+eps) mean]``."""
    upper = np.linalg.eigvalsh((1.0 + eps) * mean[None] - samples)
    lower = np.linalg.eigvalsh(samples - (1.0 - eps) * mean[None])
    ok = (upper.min(axis=1) >= -tol) & (lower.min(axis=1) >= -tol)
    return int(ok.sum())


def _run_trials(ops: np.ndarray, mean: np.ndarray, eps: float, N: int, trials: int,
                rng: np.random.Generator, batch: int = 250) -> int:
    """``ops`` is the finite, uniformly weighted support of the random operator."""
    k, d, _ = ops.shape
    flat = ops.reshape(k, d * d)
    hits = 0
    done = 0
    while done < trials:
        t = min(batch, trials - done)
        draws = rng.integers(0, k, size=(t, N))
        counts = np.zeros((t, k))
        np.add.at(counts, (np.repeat(np.arange(t), N), draws.reshape(-1)), 1.0)
        avg = (counts @ flat / N).reshape(t, d, d)
        avg = 0.5 * (avg + np.conj(np.swapaxes(avg, 1, 2)))
        hits += _interval_successes(avg, mean, eps)
        done += t
    return hits


def _result(family, dim, a, eps, N, trials, hits) -> ChernoffResult:
    p = hits / trials
    se = math.sqrt(p * (1.0 - p) / trials)
    return ChernoffResult(dim, a, eps, N, trials, hits, p, se, chernoff_bound(dim, a, eps, N), family)


def chernoff_experiment(dim: int, a: float, eps: float, N: int, trials: int, seed=None) -> ChernoffResult:
    """Empirical probability that an ``N``-sample average of random operators
    stays within ``[(1 - eps) E X, (1 + eps) E X]``, next to the analytic bound.

    The random operator is ``s W|phi><phi|W^dagger + t I`` with ``W`` a uniform
    shift-clock operator and ``|phi>`` a seeded random state; ``s`` and ``t``
    are chosen so that ``0 <= X <= I`` and ``E X = a I`` exactly.
    """
    if dim < 1 or N < 1 or trials < 1:
        raise ParamOutOfRange("dim, N and trials must be positive")
    if not 0.0 < a < 1.0:
        raise ParamOutOfRange(f"a must lie in (0, 1), got {a}")
    _check_eps(eps)
    if (1.0 + eps) * a > 1.0:
        raise ParamOutOfRange("need (1 + eps) a <= 1")
    rng = as_rng(seed)
    phi = complex_gaussian(rng, dim)
    phi /= np.linalg.norm(phi)
    if a * dim <= 1.0:
        s, t = a * dim, 0.0
    else:
        t = (a * dim - 1.0) / (dim - 1.0)
        s = 1.0 - t
    ops = []
    for k in range(dim):
        for j in range(dim):
            v = weyl_operator(dim, k, j) @ phi
            ops.append(s * np.outer(v, v.conj()) + t * np.eye(dim))
    ops = np.array(ops)
    mean = a * np.eye(dim, dtype=np.complex128)
    hits = _run_trials(ops, mean, eps, N, trials, rng)
    return _result("twirl", dim, a, eps, N, trials, hits)


def chernoff_eraser_experiment(se: SampledEraser, rho, eps: float, N: int, trials: int,
                               seed=None) -> ChernoffResult:
    """Chernoff experiment for ``X = c U rho_t U^dagger`` with ``rho_t = Pi rho^n Pi``.

    ``U`` ranges over the subspace twirl group, ``c = 1 / lambda_max(rho_t)``
    keeps ``X <= I``, and everything is expressed on the typical block, where
    ``E X = c Tr(rho_t) / dim_typ`` times the identity.
    """
    _check_eps(eps)
    ts = se.subspace
    b = ts.basis
    big = _n_copy(se, rho)
    block = b.conj().T @ big @ b  # Pi rho^n Pi on the typical block
    block = 0.5 * (block + block.conj().T)
    lam_max = float(np.linalg.eigvalsh(block)[-1])
    if lam_max <= 0:
        raise ParamOutOfRange("state has no weight on the typical subspace")
    c = 1.0 / lam_max
    k = ts.dim_typ
    a = c * float(np.trace(block).real) / k
    if (1.0 + eps) * a > 1.0 + 1e-12:
        raise ParamOutOfRange(f"(1 + eps) a = {(1 + eps) * a:.4f} exceeds 1")
    ops = []
    for x in range(k):
        for z in range(k):
            w = weyl_operator(k, x, z)
            ops.append(c * w @ block @ w.conj().T)
    ops = np.array(ops)
    mean = a * np.eye(k, dtype=np.complex128)
    hits = _run_trials(ops, mean, eps, N, trials, as_rng(seed))
    return _result(f"eraser-{se.frame}", k, min(a, 1.0), eps, N, trials, hits)


# --- rate curves ---------------------------------------------------------------


def cell_seed(master: int, n: int, index: int) -> np.random.SeedSequence:
    """Per-cell stream keyed by (master seed, n, seed index), independent of scheduling."""
    return np.random.SeedSequence(entropy=int(master), spawn_key=(int(n), int(index)))


@dataclass
class RateCurve:
    reports: list[ErasureReport]
    best_N: dict[int, int | None] = field(default_factory=dict)
    formula_N: dict[int, int] = field(default_factory=dict)
    target: float = 0.0

    def median_rate(self, n: int, kind: str = "best") -> float:
        rates = [r.rate for r in self.reports if r.n == n and r.kind == kind]
        return float(np.median(rates)) if rates else float("nan")


def _majority(successes: Sequence[bool]) -> bool:
    return sum(successes) * 2 > len(successes)


def rate_curve(
    rho, eps: float, n_max: int = 6, seeds: int = 5, master_seed: int = 0,
    frame: str = "reference", threads: int = 1, n_min: int = 1, target: float | None = None,
) -> RateCurve:
    """Run the sampled eraser for each ``n`` and search for the smallest working ``N``.

    For each ``n`` the formula-sized eraser is verified per seed.  Then ``N``
    is halved from the formula value while a majority of seeds still reach the
    target certified error (default ``eps + 2 sqrt(eps)``), and the boundary is
    refined by bisection.  If the formula value itself fails, ``N`` is doubled
    up to 8 times the formula value.  The result is a tested-grid minimum, not
    a certified one.  Values of ``n`` whose typical subspace is empty produce
    no rows and ``best_N[n] = None``.
    """
    _check_eps(eps)
    a = validate_state(rho)
    target = eps + 2.0 * math.sqrt(eps) if target is None else target
    c_r = relative_entropy_coherence(a)
    ns = list(range(n_min, n_max + 1))
    for n in ns:
        nk.check_dim(a.shape[0] ** n)

    def run_n(n: int):
        n0 = formula_ensemble_size(c_r, n, eps)
        n_cap = 8 * n0
        source = dephase(a) if frame == "reference" else a
        if typical_subspace(source, n, eps).dim_typ == 0:
            return n, n0, None, []
        erasers = [sample_eraser(a, n, eps, seed=cell_seed(master_seed, n, i), frame=frame, N=n_cap)
                   for i in range(seeds)]
        big = nk.tensor_power(a, n)
        cache: dict[int, bool] = {}

        def passes(m: int) -> bool:
            if m not in cache:
                ok = []
                for se in erasers:
                    d_tau, out = _distance_to_tau(se, big, m)
                    d_w, _ = incoherent_distance_witness(out)
                    ok.append(certified_eps(se, d_tau, d_w) <= target)
                cache[m] = _majority(ok)
            return cache[m]

        best: int | None = None
        if passes(n0):
            hi = n0
            lo = hi // 2
            while lo >= 1 and passes(lo):
                hi, lo = lo, lo // 2
        else:
            lo, hi = n0, None
            m = n0
            while m < n_cap:
                m = min(2 * m, n_cap)
                if passes(m):
                    hi = m
                    break
                lo = m
        if hi is not None:
            # invariant: passes(hi); lo == 0 or not passes(lo)
            while hi - lo > 1:
                mid = (hi + lo) // 2
                if passes(mid):
                    hi = mid
                else:
                    lo = mid
            best = hi
        rows = []
        for i, se in enumerate(erasers):
            rows.append(verify_eraser(se, a, seed_label=i, kind="formula", m=n0))
            if best is not None:
                rows.append(verify_eraser(se, a, seed_label=i, kind="best", m=best))
        return n, n0, best, rows

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_n, ns))
    else:
        results = [run_n(n) for n in ns]

    reports: list[ErasureReport] = []
    curve = RateCurve(reports=reports, target=target)
    for n, n0, best, rows in sorted(results, key=lambda r: r[0]):
        curve.formula_N[n] = n0
        curve.best_N[n] = best
        reports.extend(rows)
    reports.sort(key=lambda r: (r.n, r.seed, r.kind != "formula"))
    return curve
