"""Command-line surface.

Subcommands: ``detect`` (run the pipeline on a state file), ``criterion``
(single analytical test), ``verify`` (recheck a certificate), ``gen``
(write example/benchmark states and ensembles), ``table`` (maintain a table
of faithful base states), ``repro`` (recompute headline numbers).

Exit codes are uniform: 0 = proven separable / all checks passed,
1 = inconclusive / check failed, 2 = usage or input error.  Every command is
deterministic given its flags and ``--seed``.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__, serialize
from .certificate import state_digest, verify_certificate
from .criteria import SEPARABLE, eigenvalue_check, gurvits_barnum_check, ppt_check, spiked_isotropic
from .detector import detect_auto, detect_enhanced, detect_linear
from .linalg import BipartiteState
from .serialize import FileFormatError
from .states import (
    assemble,
    is_faithful,
    isotropic_state,
    maximally_mixed,
    random_separable,
)

MAX_DIM = 6

EXIT_OK = 0
EXIT_INCONCLUSIVE = 1
EXIT_ERROR = 2


class CliError(Exception):
    """Input or usage problem; maps to exit code 2."""


def _echo(line: str = "") -> None:
    print(line)


def _load_state_checked(path, force: bool) -> BipartiteState:
    try:
        state = serialize.load_state(path)
    except (FileFormatError, OSError) as exc:
        raise CliError(str(exc)) from exc
    if max(state.dA, state.dB) > MAX_DIM and not force:
        raise CliError(
            f"local dimension {max(state.dA, state.dB)} exceeds the guard ({MAX_DIM}); "
            "pass --force to override"
        )
    return state


def _ppt_advisory(state: BipartiteState) -> str | None:
    if state.dA * state.dB > 6:
        return None
    rep = ppt_check(state)
    label = {"separable": "Separable (PPT)", "entangled": "Entangled (PPT)"}.get(
        rep.verdict, "Inconclusive (PPT)"
    )
    return f"{label}, min eig of partial transpose = {rep.statistic:.6g}"


def _report_header(cmd: str, args) -> None:
    _echo(f"sepcert {cmd} report (version {__version__})")
    if getattr(args, "seed", None) is not None:
        _echo(f"  seed: {args.seed}")


def cmd_detect(args) -> int:
    state = _load_state_checked(args.state, args.force)
    _report_header("detect", args)
    _echo(f"  state: {args.state} (dA={state.dA}, dB={state.dB})")
    _echo(
        f"  tolerances: feas={args.tol_feas:g} eq={args.tol_eq:g} cert={args.tol_cert:g}"
    )
    kwargs = dict(eps_feas=args.tol_feas, eps_eq=args.tol_eq, cert_tol=args.tol_cert)

    if args.base is not None:
        try:
            base = serialize.load_ensemble(args.base)
        except (FileFormatError, OSError) as exc:
            raise CliError(str(exc)) from exc
        out = detect_linear(base, state, eps_eq=args.tol_eq, cert_tol=args.tol_cert)
        if "fallback" in out.diagnostics:
            _echo(f"  note: {out.diagnostics['fallback']}")
        if not out.is_separable and args.enhanced == "on":
            out = detect_enhanced(base, state, **kwargs)
            if "fallback" in out.diagnostics:
                _echo(f"  note: {out.diagnostics['fallback']}")
    else:
        table = ()
        if args.table is not None:
            _, entries = _load_table_checked(args.table)
            table = tuple(
                e["ensemble"] for e in entries if e.get("status", "active") == "active"
            )
        out = detect_auto(
            state,
            n_bases=args.random_bases,
            seed=args.seed,
            table=table,
            enhanced=args.enhanced == "on",
            jobs=args.jobs,
            **kwargs,
        )
        trials = out.diagnostics.get("trials", [])
        if trials:
            _echo(f"  base trials: {len(trials)}")

    _echo(f"  verdict: {'SEPARABLE' if out.is_separable else 'INCONCLUSIVE'}")
    if out.mode:
        _echo(f"  mode: {out.mode}")
    if "margin" in out.diagnostics:
        _echo(f"  margin: {out.diagnostics['margin']:.6g}")
    if "reason" in out.diagnostics:
        _echo(f"  reason: {out.diagnostics['reason']}")
    advisory = _ppt_advisory(state)
    if advisory:
        _echo(f"  ppt advisory: {advisory}")
    if out.certificate is not None:
        _echo(f"  certificate: terms={out.certificate.n_terms} residual={out.certificate.residual:.3e}")
        if args.cert_out:
            serialize.save_certificate(out.certificate, args.cert_out)
            _echo(f"  certificate written: {args.cert_out}")
    elif args.cert_out:
        _echo("  certificate written: none (inconclusive)")
    return EXIT_OK if out.is_separable else EXIT_INCONCLUSIVE


def cmd_criterion(args) -> int:
    state = _load_state_checked(args.state, args.force)
    which = {"eig": eigenvalue_check, "gb": gurvits_barnum_check, "ppt": ppt_check}[args.which]
    try:
        rep = which(state)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    _report_header("criterion", args)
    _echo(f"  state: {args.state} (dA={state.dA}, dB={state.dB})")
    _echo(f"  criterion: {rep.name}")
    _echo(f"  verdict: {rep.verdict.upper()}")
    _echo(f"  statistic: {rep.statistic:.12g}")
    _echo(f"  threshold: {rep.threshold:.12g}")
    return EXIT_OK if rep.verdict == SEPARABLE else EXIT_INCONCLUSIVE


def cmd_verify(args) -> int:
    state = _load_state_checked(args.state, args.force)
    try:
        cert = serialize.load_certificate(args.certificate)
    except (FileFormatError, OSError) as exc:
        raise CliError(str(exc)) from exc
    ok, report = verify_certificate(cert, state, tol=args.tol_cert)
    _report_header("verify", args)
    _echo(f"  certificate: {args.certificate} (terms={cert.n_terms})")
    _echo(f"  state: {args.state}")
    _echo(f"  residual: {report['residual']:.3e} (tol {report['tol']:g})")
    for name, passed in sorted(report["checks"].items()):
        _echo(f"  check {name}: {'ok' if passed else 'FAILED'}")
    _echo(f"  verdict: {'VALID' if ok else 'INVALID'}")
    return EXIT_OK if ok else EXIT_INCONCLUSIVE


def cmd_gen(args) -> int:
    meta = {"generator": args.kind, "version": __version__}
    if args.kind == "isotropic":
        state = isotropic_state(args.d, args.lam)
        meta.update(d=args.d, lam=args.lam)
        serialize.save_state(state, args.out, meta)
    elif args.kind == "sigma-eps":
        state = spiked_isotropic(args.d, args.eps)
        meta.update(d=args.d, eps=args.eps)
        serialize.save_state(state, args.out, meta)
    elif args.kind == "random-sep":
        ens = random_separable(args.da, args.db, args.terms, args.seed)
        meta.update(da=args.da, db=args.db, terms=args.terms, seed=args.seed)
        serialize.save_ensemble(ens, args.out, meta)
        if args.state_out:
            serialize.save_state(assemble(ens), args.state_out, meta)
    elif args.kind == "mix":
        state = _load_state_checked(args.state, args.force)
        if args.with_state:
            other = _load_state_checked(args.with_state, args.force)
            if other.dims != state.dims:
                raise CliError("mix: dimension mismatch between the two states")
            other_mat = other.mat
        else:
            other_mat = maximally_mixed(state.dA).mat if state.dA == state.dB else None
            if other_mat is None:
                raise CliError("mix: --with is required for rectangular states")
        mixed = (1.0 - args.p) * other_mat + args.p * state.mat
        meta.update(p=args.p)
        serialize.save_state(BipartiteState(state.dA, state.dB, mixed), args.out, meta)
    else:  # pragma: no cover - argparse restricts choices
        raise CliError(f"unknown kind {args.kind}")
    _echo(f"wrote {args.out}")
    return EXIT_OK


def _load_table_checked(path):
    try:
        d, entries = serialize.load_table(path)
    except (FileFormatError, OSError) as exc:
        raise CliError(str(exc)) from exc
    for entry in entries:
        digest = state_digest(assemble(entry["ensemble"]))
        if entry.get("digest") and entry["digest"] != digest:
            raise CliError(
                f"table entry {entry.get('label', '?')!r}: ensemble does not reassemble "
                "to its recorded digest"
            )
    return d, entries


def cmd_table(args) -> int:
    if args.action == "add":
        import pathlib

        if pathlib.Path(args.table).exists():
            d, entries = _load_table_checked(args.table)
        else:
            d, entries = None, []
        if args.ensemble:
            try:
                ens = serialize.load_ensemble(args.ensemble)
            except (FileFormatError, OSError) as exc:
                raise CliError(str(exc)) from exc
            label = args.label or f"file:{args.ensemble}"
            seed = None
        else:
            if args.terms is None:
                raise CliError("table add needs --ensemble or --random with --terms")
            if d is None and args.d is None:
                raise CliError("new table: pass --d for random entries")
            dim = d if d is not None else args.d
            ens = random_separable(dim, dim, args.terms, args.seed)
            label = args.label or f"seed{args.seed}-t{args.terms}"
            seed = args.seed
        dA, dB = ens.dims
        if dA != dB:
            raise CliError("base tables hold square-dimension ensembles")
        if d is not None and dA != d:
            raise CliError(f"table dimension is {d}, ensemble has {dA}")
        state = assemble(ens)
        faithful, sigma_min = is_faithful(state)
        if not faithful:
            _echo(f"rejected: not faithful (sigma_min={sigma_min:.3e})")
            return EXIT_INCONCLUSIVE
        entries.append(
            {
                "ensemble": ens,
                "label": label,
                "seed": seed,
                "sigma_min": sigma_min,
                "digest": state_digest(state),
                "status": "active",
            }
        )
        serialize.save_table(entries, dA, args.table)
        _echo(f"added {label} (sigma_min={sigma_min:.3e}); table has {len(entries)} entries")
        return EXIT_OK

    d, entries = _load_table_checked(args.table)
    if args.action == "list":
        _echo(f"base table (d={d}, {len(entries)} entries)")
        for entry in entries:
            _echo(
                f"  [{entry['status']:>6}] {entry['label']}: terms={len(entry['ensemble'])} "
                f"sigma_min={entry['sigma_min']:.3e}"
                + (f" pruned_by={entry['pruned_by']}" if entry.get("pruned_by") else "")
            )
        return EXIT_OK
    if args.action == "prune":
        from .detector import table_prune

        active = [e for e in entries if e.get("status", "active") == "active"]
        kept, dropped = table_prune([e["ensemble"] for e in active], seed=args.seed)
        for j, i in dropped:
            active[j]["status"] = "pruned"
            active[j]["pruned_by"] = active[i]["label"]
        serialize.save_table(entries, d, args.table)
        _echo(f"pruned {len(dropped)} of {len(active)} active entries; {len(kept)} remain active")
        return EXIT_OK
    raise CliError(f"unknown table action {args.action}")  # pragma: no cover


def cmd_repro(args) -> int:
    from .repro import run_battery

    _report_header("repro", args)
    rows = run_battery(full=args.full, seed=args.seed)
    all_ok = True
    for row in rows:
        tag = "PASS" if row.passed else "FAIL"
        info = " (informational)" if row.informational else ""
        _echo(f"  [{tag}] {row.name}{info}: {row.detail}")
        if not row.informational:
            all_ok &= row.passed
    _echo(f"  overall: {'PASS' if all_ok else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_INCONCLUSIVE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepcert",
        description="Prove bipartite states separable and emit verifiable certificates.",
    )
    parser.add_argument("--version", action="version", version=f"sepcert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run the detection pipeline on a state file")
    p.add_argument("state")
    p.add_argument("--base", help="ensemble file to use as the base state")
    p.add_argument("--table", help="base-table file to draw bases from")
    p.add_argument("--random-bases", type=int, default=16, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--enhanced", choices=("on", "off"), default="on")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--cert-out", metavar="PATH")
    p.add_argument("--tol-feas", type=float, default=1e-7)
    p.add_argument("--tol-eq", type=float, default=1e-8)
    p.add_argument("--tol-cert", type=float, default=1e-6)
    p.add_argument("--force", action="store_true", help="override the dimension guard")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("criterion", help="evaluate one analytical criterion")
    p.add_argument("state")
    p.add_argument("--which", choices=("eig", "gb", "ppt"), required=True)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_criterion, seed=None)

    p = sub.add_parser("verify", help="recheck a certificate against a state")
    p.add_argument("certificate")
    p.add_argument("state")
    p.add_argument("--tol-cert", type=float, default=1e-6)
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_verify, seed=None)

    p = sub.add_parser("gen", help="generate states and ensembles")
    gen_sub = p.add_subparsers(dest="kind", required=True)
    g = gen_sub.add_parser("isotropic")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--lam", "--lambda", dest="lam", type=float, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen, seed=None, force=False)
    g = gen_sub.add_parser("sigma-eps")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--eps", type=float, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen, seed=None, force=False)
    g = gen_sub.add_parser("random-sep")
    g.add_argument("--da", type=int, required=True)
    g.add_argument("--db", type=int, required=True)
    g.add_argument("--terms", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--state-out")
    g.set_defaults(func=cmd_gen, force=False)
    g = gen_sub.add_parser("mix")
    g.add_argument("--state", required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--with", dest="with_state")
    g.add_argument("--out", required=True)
    g.add_argument("--force", action="store_true")
    g.set_defaults(func=cmd_gen, seed=None)

    p = sub.add_parser("table", help="maintain a table of faithful base states")
    p.add_argument("action", choices=("add", "prune", "list"))
    p.add_argument("table")
    p.add_argument("--ensemble", help="ensemble file to add")
    p.add_argument("--random", action="store_true", help="add a random faithful base")
    p.add_argument("--terms", type=int)
    p.add_argument("--d", type=int, help="dimension when creating a new table")
    p.add_argument("--label")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("repro", help="recompute headline numbers; exit 0 iff all pass")
    p.add_argument("--full", action="store_true", help="full-size acceptance battery")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_repro)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
