"""Command line front end.

Each subcommand parses its inputs, calls one library routine and writes a
report.  Exit codes: 0 success, 2 invalid input, 3 dimension overflow,
4 numerical failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import channels as ch
from . import coherence as coh
from . import erasure as er
from . import numkernel as nk
from . import reports
from . import states as st
from . import typicality as ty
from .errors import DimensionOverflow, NumericalFailure, ValidationError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_OVERFLOW = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5

METRIC_COLUMNS = ("metric", "value")


class UsageError(ValidationError):
    pass


# --- inputs ----------------------------------------------------------------


def load_state(spec: str) -> tuple[np.ndarray, object]:
    """A state from a JSON document path or a named family.

    Names: ``psi:D`` (maximally coherent), ``rhop:D:P``, ``mixed:D``,
    ``diag:P0,P1,...``.  Returns the state and a manifest description.
    """
    path = Path(spec)
    if path.exists():
        doc = json.loads(path.read_text())
        return st.state_from_doc(doc), doc
    kind, _, rest = spec.partition(":")
    try:
        if kind == "psi":
            rho = st.projector(st.maximally_coherent(int(rest)))
        elif kind == "rhop":
            d, p = rest.split(":")
            rho = st.max_coherent_mixed(int(d), float(p))
        elif kind == "mixed":
            rho = np.eye(int(rest), dtype=np.complex128) / int(rest)
        elif kind == "diag":
            rho = np.diag([float(x) for x in rest.split(",")]).astype(np.complex128)
        else:
            raise UsageError(f"no such file and unknown state name: {spec!r}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise UsageError(f"cannot parse state spec {spec!r}: {exc}") from exc
    return st.validate_state(rho), spec


def load_ensemble(spec: str) -> tuple[ch.UnitaryEnsemble, object]:
    """An ensemble from a JSON document path or ``weyl:D``, ``zdephase:D``, ``pauli-pair``."""
    path = Path(spec)
    if path.exists():
        doc = json.loads(path.read_text())
        return ch.ensemble_from_doc(doc), doc
    kind, _, rest = spec.partition(":")
    try:
        if kind == "weyl":
            e = ch.weyl_ensemble(int(rest))
        elif kind == "zdephase":
            e = ch.z_dephasing_ensemble(int(rest))
        elif kind == "pauli-pair":
            e = ch.z_dephasing_ensemble(2)
        else:
            raise UsageError(f"no such file and unknown ensemble name: {spec!r}")
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise UsageError(f"cannot parse ensemble spec {spec!r}: {exc}") from exc
    return e, spec


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"--{name.replace('_', '-')} is required for '{args.command}'")


# --- commands --------------------------------------------------------------


def _metrics(pairs) -> tuple[tuple[str, ...], list[dict]]:
    return METRIC_COLUMNS, [{"metric": k, "value": v} for k, v in pairs]


def cmd_coherence(args, manifest):
    _need(args, "state")
    rho, desc = load_state(args.state)
    manifest["state"] = desc
    eps_w, _ = coh.incoherent_distance_witness(rho)
    pairs = [
        ("dim", rho.shape[0]),
        ("entropy", st.von_neumann_entropy(rho)),
        ("dephased_entropy", st.von_neumann_entropy(coh.dephase(rho))),
        ("c_r", coh.relative_entropy_coherence(rho)),
        ("c_l1", coh.l1_coherence(rho)),
        ("witness_eps", eps_w),
    ]
    if rho.shape[0] <= coh.OPT_MAX_DIM:
        manifest["iters"] = args.iters
        pairs.append(("optimized_eps", coh.incoherent_distance_opt(rho, args.iters, seed=args.seed)))
    return _metrics(pairs)


def cmd_channel(args, manifest):
    _need(args, "state", "ensemble")
    rho, sdesc = load_state(args.state)
    e, edesc = load_ensemble(args.ensemble)
    manifest.update(state=sdesc, ensemble=edesc)
    out = ch.apply_ensemble(e, rho)
    d = out.shape[0]
    eps_w, _ = coh.incoherent_distance_witness(out)
    return _metrics([
        ("dim", d),
        ("N", e.size),
        ("incoherent_ensemble", e.incoherent),
        ("output_entropy", st.von_neumann_entropy(out)),
        ("output_c_r", coh.relative_entropy_coherence(out)),
        ("output_witness_eps", eps_w),
        ("distance_to_maximally_mixed", nk.trace_norm(out - np.eye(d) / d)),
        ("distance_to_dephased_input", nk.trace_norm(out - coh.dephase(rho))),
    ])


def cmd_exchange(args, manifest):
    _need(args, "state", "ensemble")
    rho, sdesc = load_state(args.state)
    e, edesc = load_ensemble(args.ensemble)
    manifest.update(state=sdesc, ensemble=edesc)
    h_e, h_p, log_n = ch.ensemble_entropy_bounds(e, rho)
    pairs = [("H_e", h_e), ("H_p", h_p), ("log2_N", log_n), ("c_r", coh.relative_entropy_coherence(rho))]
    if rho.shape[0] ** 2 <= nk.dim_cap():
        pairs.append(("H_e_purification", ch.entropy_exchange_via_purification(e, rho)))
    return _metrics(pairs)


def cmd_typical(args, manifest):
    _need(args, "state", "copies")
    rho, desc = load_state(args.state)
    delta = args.delta if args.delta is not None else args.eps
    if delta is None:
        raise UsageError("--delta is required for 'typical'")
    manifest.update(state=desc, copies=args.copies, delta=delta)
    ts = ty.typical_subspace(rho, args.copies, delta)
    rep = ty.typicality_properties(ts, rho)
    cols = ("n", "delta", "H", "members", "mass", "eps", "dim_lower", "dim_upper",
            "dim_bounds_ok", "eig_min", "eig_max", "sandwich_lower", "sandwich_upper", "sandwich_ok")
    row = dict(n=rep.n, delta=rep.delta, H=rep.entropy, members=rep.dim_typ, mass=rep.mass,
               eps=rep.eps, dim_lower=rep.dim_lower, dim_upper=rep.dim_upper,
               dim_bounds_ok=rep.dim_bounds_ok, eig_min=rep.eig_min, eig_max=rep.eig_max,
               sandwich_lower=rep.sandwich_lower, sandwich_upper=rep.sandwich_upper,
               sandwich_ok=rep.sandwich_ok)
    return cols, [row]


def cmd_lemma1(args, manifest):
    _need(args, "state", "ensemble", "copies")
    rho, sdesc = load_state(args.state)
    e, edesc = load_ensemble(args.ensemble)
    manifest.update(state=sdesc, ensemble=edesc, copies=args.copies)
    rep = er.verify_lemma1(e, rho, args.copies)
    row = {k: getattr(rep, k) for k in er.Lemma1Report.__dataclass_fields__}
    return tuple(row), [row]


def _check_eps_arg(args):
    _need(args, "eps")
    if not 0.0 < args.eps < 0.5:
        raise UsageError(f"--eps must lie in (0, 1/2), got {args.eps}")


def cmd_erase(args, manifest):
    _need(args, "state", "copies")
    _check_eps_arg(args)
    rho, desc = load_state(args.state)
    manifest.update(state=desc, copies=args.copies, eps=args.eps, seeds=args.seeds,
                    frame=args.frame, N=args.N)

    def cell(i):
        se = er.sample_eraser(rho, args.copies, args.eps, seed=er.cell_seed(args.seed, args.copies, i),
                              frame=args.frame, N=args.N)
        return er.verify_eraser(se, rho, seed_label=i)

    rows = _map(cell, range(args.seeds), args.threads)
    return er.REPORT_COLUMNS, [r.row() for r in rows]


def cmd_chernoff(args, manifest):
    _check_eps_arg(args)
    dims = _int_list(args.dim or "2")
    sizes = _int_list(args.N_list or "16")
    manifest.update(dims=dims, N=sizes, eps=args.eps, trials=args.trials,
                    a=args.a if args.a is not None else "1/dim")
    cells = [(d, n) for d in dims for n in sizes]

    def cell(c):
        d, n = c
        a = args.a if args.a is not None else 1.0 / d
        seed = np.random.SeedSequence(entropy=args.seed, spawn_key=(d, n))
        return er.chernoff_experiment(d, a, args.eps, n, args.trials, seed=seed)

    rows = _map(cell, cells, args.threads)
    return er.CHERNOFF_COLUMNS, [r.row() for r in rows]


def cmd_rates(args, manifest):
    _need(args, "state")
    _check_eps_arg(args)
    rho, desc = load_state(args.state)
    n_max = args.n_max if args.n_max is not None else (args.copies or 6)
    manifest.update(state=desc, eps=args.eps, n_min=args.n_min, n_max=n_max, seeds=args.seeds,
                    frame=args.frame)
    curve = er.rate_curve(rho, args.eps, n_max=n_max, seeds=args.seeds, master_seed=args.seed,
                          frame=args.frame, threads=args.threads, n_min=args.n_min)
    manifest["target_eps"] = curve.target
    manifest["best_N"] = {str(k): v for k, v in curve.best_N.items()}
    return er.REPORT_COLUMNS, [r.row() for r in curve.reports]


def _map(fn, items, threads):
    items = list(items)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


COMMANDS = {
    "coherence": cmd_coherence,
    "channel": cmd_channel,
    "exchange": cmd_exchange,
    "typical": cmd_typical,
    "lemma1": cmd_lemma1,
    "erase": cmd_erase,
    "chernoff": cmd_chernoff,
    "rates": cmd_rates,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--state", help="state document path or name (psi:D, rhop:D:P, mixed:D, diag:...)")
    common.add_argument("--ensemble", help="ensemble document path or name (weyl:D, zdephase:D, pauli-pair)")
    common.add_argument("--copies", type=int, help="number of copies n")
    common.add_argument("--eps", type=float, help="decoherence error, in (0, 1/2)")
    common.add_argument("--delta", type=float, help="typicality window")
    common.add_argument("--N", dest="N_list", metavar="N", help="ensemble size(s); comma list for chernoff")
    common.add_argument("--dim", help="dimension(s); comma list for chernoff")
    common.add_argument("--a", type=float, help="operator lower bound for chernoff (default 1/dim)")
    common.add_argument("--trials", type=int, default=1000)
    common.add_argument("--seeds", type=int, default=5, help="number of seeds per cell")
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--frame", choices=er.FRAMES, default="reference")
    common.add_argument("--n-min", type=int, default=1)
    common.add_argument("--n-max", type=int)
    common.add_argument("--iters", type=int, default=2000)
    common.add_argument("--dim-cap", type=int, help=f"override the dimension cap (also ${nk.DIM_CAP_ENV})")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("tabular", "structured"), default="tabular")

    parser = argparse.ArgumentParser(prog="coherase", description="Coherence erasure experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK

    saved_cap = os.environ.get(nk.DIM_CAP_ENV)
    if args.dim_cap is not None:
        os.environ[nk.DIM_CAP_ENV] = str(args.dim_cap)
    try:
        return _dispatch(args)
    finally:
        if saved_cap is None:
            os.environ.pop(nk.DIM_CAP_ENV, None)
        else:
            os.environ[nk.DIM_CAP_ENV] = saved_cap


def _dispatch(args) -> int:
    args.N = None
    if args.command in ("erase",) and args.N_list:
        args.N = int(args.N_list)
    args.threads = max(1, args.threads)

    manifest = {"command": args.command, "artifact_version": __version__, "master_seed": args.seed}
    try:
        columns, rows = COMMANDS[args.command](args, manifest)
        render = reports.render_tabular if args.format == "tabular" else reports.render_structured
        text = render(manifest, columns, rows)
    except DimensionOverflow as exc:
        print(f"coherase: dimension overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW
    except NumericalFailure as exc:
        print(f"coherase: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, ValueError, json.JSONDecodeError) as exc:
        print(f"coherase: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"coherase: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"coherase: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
