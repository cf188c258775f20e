"""Command-line interface: ``gme-detect {verdict,scan,selftest,tensor}``.

Exit codes: 0 detected / checks passed, 1 not detected or inconclusive /
checks failed, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import bloch, criteria, scan, states, weyl
from .states import InvalidStateError

EXIT_DETECTED = 0
EXIT_NOT_DETECTED = 1
EXIT_INPUT_ERROR = 2


class InputError(Exception):
    pass


def _params(args) -> criteria.CriterionParams:
    return criteria.CriterionParams(args.alpha, args.beta, args.gamma, args.placement)


def _family_ket(args) -> states.KetExpression:
    try:
        return states.named_state(args.family, n=args.n, d=args.d)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _load_state(args) -> states.DensityMatrix:
    if (args.input is None) == (args.family is None):
        raise InputError("give exactly one of --input or --family")
    try:
        if args.input is not None:
            with open(args.input) as fh:
                desc = json.load(fh)
            rho = states.from_descriptor(desc)
        else:
            x = 1.0 if args.x is None else args.x
            rho = states.white_noise_mix(_family_ket(args), x)
    except (OSError, json.JSONDecodeError, InvalidStateError, ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None
    report = states.validate(rho)
    if not report.ok:
        raise InputError(report.failures[0])
    return rho


def _splits(args):
    if not getattr(args, "split", None):
        return None
    try:
        return [states.Bipartition.parse(s) for s in args.split]
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _fmt(v) -> str:
    return "n/a" if v is None else f"{v:.6g}"


def cmd_verdict(args, out) -> int:
    rho = _load_state(args)
    if not 3 <= rho.n <= 6:
        raise InputError(f"verdict needs 3..6 parties, got {rho.n}")
    report = criteria.gme_verdict(rho, _params(args), _splits(args))
    if args.format == "json":
        out.write(json.dumps(report.to_dict(), indent=2) + "\n")
    elif args.format == "csv":
        out.write("left,right,trace_norm,bound,applicable\n")
        for r in report.records:
            d = r.to_dict()
            out.write(f"{str(r.bipartition).split('|')[0]},{str(r.bipartition).split('|')[1]},"
                      f"{d['trace_norm']!r},{d['bound']!r},{d['applicable']}\n")
    else:
        for r in report.records:
            flag = "" if r.bound.applicable else "  (bound inapplicable)"
            out.write(f"{str(r.bipartition):>12}  ||N||_tr = {_fmt(r.trace_norm)}  bound = {_fmt(r.bound.value)}{flag}\n")
        out.write(f"T = {_fmt(report.T)}\nK = {_fmt(report.K)}\n")
        status = "inconclusive" if report.inconclusive else ("GME detected" if report.detected else "not detected")
        out.write(f"verdict: {status}\n")
        for c in report.caveats:
            out.write(f"note: {c}\n")
    return EXIT_DETECTED if report.detected else EXIT_NOT_DETECTED


def _parse_rows(text: str) -> list[criteria.CriterionParams]:
    rows = []
    for chunk in text.split(";"):
        vals = [float(v) for v in chunk.split(",")]
        if len(vals) not in (2, 3):
            raise InputError(f"parameter row {chunk!r} needs alpha,beta[,gamma]")
        rows.append(criteria.CriterionParams(*vals))
    return rows


def cmd_scan(args, out) -> int:
    if args.family is None:
        raise InputError("scan needs --family")
    family = scan.FamilySpec(_family_ket(args), name=args.family)
    bips = _splits(args)
    if args.curve is not None:
        if args.curve < 2:
            raise InputError("--curve needs at least 2 grid points")
        rows = scan.curve(family, _params(args), args.curve, bips)
        if args.format == "json":
            out.write(json.dumps(rows, indent=2) + "\n")
        else:
            out.write(scan.rows_to_csv(rows))
        return 0
    plist = _parse_rows(args.rows) if args.rows else [_params(args)]
    tol = 1e-4 if args.tol is None else args.tol
    results = scan.table(family, plist, tol, bips)
    if args.format == "json":
        out.write(scan.results_to_json(results) + "\n")
    elif args.format == "csv":
        out.write(scan.results_to_csv(results))
    else:
        for r in results:
            p = r.params
            where = "none in range" if r.threshold is None else f"{r.threshold:.6g} < x <= 1"
            out.write(f"alpha={p.alpha:g} beta={p.beta:g} gamma={p.gamma:g}: detected for {where}"
                      f" [{r.method}]{'  ' + r.note if r.note else ''}\n")
    return 0


def _selftest_dims(args):
    if args.dims:
        try:
            dims = tuple(int(v) for v in args.dims.split(","))
            states.PartySystem(dims)
        except ValueError as exc:
            raise InputError(f"bad --dims: {exc}") from None
        return [dims]
    return [(2, 2), (2, 3), (2, 2, 2), (3, 3, 2), (2, 2, 2, 2)]


def run_selftest(dims_list, samples: int, seed: int) -> list[tuple[str, float, float, bool]]:
    """Oracle battery; returns ``(check, worst value, tolerance, ok)`` rows."""
    rng = np.random.default_rng(seed)
    rows = []

    def add(name, worst, tol):
        rows.append((name, float(worst), tol, bool(worst <= tol)))

    add("weyl algebra d<=7", max(weyl.algebra_check(d).max_deviation for d in range(2, 8)), 1e-12)
    for dims in dims_list:
        tag = "x".join(map(str, dims))
        rt = purity = herm = 0.0
        for _ in range(samples):
            rho = states.random_mixed(dims, rank=int(rng.integers(1, 4)), seed=rng)
            t = bloch.decompose(rho)
            rt = max(rt, np.abs(bloch.reconstruct(t).matrix - rho.matrix).max())
            purity = max(purity, bloch.purity_identity_residual(rho, t))
            herm = max(herm, bloch.single_party_hermiticity_residual(t))
        add(f"round trip {tag}", rt, 1e-10)
        add(f"purity identity {tag}", purity, 1e-9)
        add(f"coefficient hermiticity {tag}", herm, 1e-10)

        bound_excess = marg = 0.0
        full = tuple(range(1, len(dims) + 1))
        for _ in range(samples):
            rho = states.random_pure(dims, rng)
            t = bloch.decompose(rho)
            if len(dims) == 1:
                excess = bloch.subset_norm_sq(t, full) - (dims[0] - 1)
            elif len(dims) == 2:
                excess = bloch.subset_norm_sq(t, full) - criteria.m_bound(*dims)
            else:
                nb = criteria.n_bound(dims)
                excess = bloch.subset_norm_sq(t, full) - nb.value if nb.hypothesis_ok else -np.inf
            bound_excess = max(bound_excess, excess)
            marg = max(marg, max(bloch.marginal_identity_residual(rho, q, t) for q in full))
        add(f"full-correlation bound {tag} (excess)", bound_excess, 1e-8)
        add(f"marginal identity {tag}", marg, 1e-8)

        if len(dims) >= 3:
            p = criteria.CriterionParams(1.0, 1.0, 1.0)
            for bip in states.all_bipartitions(len(dims)):
                chk = criteria.biseparable_bound_check(bip, dims, p, samples, seed=rng)
                if chk.skipped:
                    continue
                add(f"biseparable bound {tag} {bip} (violations)", chk.violations, 0)
    return rows


def cmd_selftest(args, out) -> int:
    dims_list = _selftest_dims(args)
    start = time.perf_counter()
    rows = run_selftest(dims_list, args.samples, args.seed)
    if args.format == "json":
        out.write(json.dumps([dict(zip(("check", "worst", "tol", "ok"), r)) for r in rows], indent=2) + "\n")
    else:
        for name, worst, tol, ok in rows:
            out.write(f"{'PASS' if ok else 'FAIL'}  {name}: {worst:.3g} (tol {tol:g})\n")
        if args.format == "text":
            out.write(f"{sum(r[3] for r in rows)}/{len(rows)} checks passed "
                      f"in {time.perf_counter() - start:.1f} s\n")
    return 0 if all(r[3] for r in rows) else 1


def cmd_tensor(args, out) -> int:
    rho = _load_state(args)
    cutoff = 1e-12 if args.tol is None else args.tol
    records = bloch.coefficient_records(bloch.decompose(rho), cutoff)
    out.write(json.dumps(records, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_argument_group("input")
    src.add_argument("--input", metavar="PATH", help="state descriptor JSON")
    src.add_argument("--family", metavar="NAME", help=f"named state: {', '.join(states.NAMED_STATES)}")
    src.add_argument("--n", type=int, help="number of parties for the named state")
    src.add_argument("--d", type=int, help="local dimension for the named state")
    src.add_argument("--x", type=float, help="white-noise mixing parameter (default 1)")
    crit = common.add_argument_group("criterion")
    crit.add_argument("--alpha", type=float, default=1.0)
    crit.add_argument("--beta", type=float, default=1.0)
    crit.add_argument("--gamma", type=float, default=1.0)
    crit.add_argument("--placement", choices=["disjoint", "leading-overlap"], default="disjoint")
    crit.add_argument("--split", action="append", metavar="L|R",
                      help="restrict to this bipartition (repeatable), e.g. '1|234'")
    common.add_argument("--format", choices=["json", "csv", "text"], default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=200)
    common.add_argument("--tol", type=float, default=None)

    parser = argparse.ArgumentParser(prog="gme-detect", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verdict", parents=[common], help="test a state for genuine multipartite entanglement")
    p_scan = sub.add_parser("scan", parents=[common], help="white-noise threshold scan of a named family")
    p_scan.add_argument("--curve", type=int, metavar="GRID", help="emit F(x) = T - K on GRID points")
    p_scan.add_argument("--rows", metavar="A,B[,G];...", help="several parameter rows for one table")
    p_self = sub.add_parser("selftest", parents=[common], help="run the numerical oracle battery")
    p_self.add_argument("--dims", metavar="D1,D2,...", help="restrict to one system")
    sub.add_parser("tensor", parents=[common], help="dump correlation-tensor coefficients as JSON")
    return parser


COMMANDS = {"verdict": cmd_verdict, "scan": cmd_scan, "selftest": cmd_selftest, "tensor": cmd_tensor}


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT_ERROR if exc.code else 0
    if args.format is None:
        args.format = "csv" if args.command == "scan" and args.curve else "text"
    try:
        return COMMANDS[args.command](args, out)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
