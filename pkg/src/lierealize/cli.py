"""Command-line front end: ``lierealize <subcommand> ...``.

Exit status: 0 when the command's status is ok, 1 on a verification failure,
2 on usage or input errors.  ``--json`` prints one Report object
``{command, status, payload, seed}``; the text form is meant for people.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import proofcheck
from .algebra import ALGEBRAS, AlgebraTag, StructureConstants, identify, killing_form, signature, validate
from .catalog import CatalogError, get_entry, list_catalog, verify_all, verify_entry
from .liefield import (
    VectorField, express_in_span, flow_rk4, generic_rank, lie_bracket, match_basis, pushforward,
)
from .parser import ParseError, parse_expr, parse_field_list
from .symexpr import SingularPointError

SEED_ENV = "LIE_REALIZE_SEED"


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _load_fields(path: str, n: int | None = None) -> list[VectorField]:
    fields = parse_field_list(_read(path), n)
    if not fields:
        raise UsageError(f"{path} holds no fields")
    return fields


def _params(items) -> dict[str, Fraction]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--param expects name=value, got {item!r}")
        out[name.strip()] = parse_expr(value.strip(), 0).constant_value()
    return out


def _matrix_str(M) -> list[list[str]]:
    return [[str(x) for x in row] for row in M]


# --------------------------------------------------------------------------
# subcommands; each returns (status, payload, text lines)


def cmd_bracket(args, rng):
    fields = _load_fields(args.fields, args.n)
    i, j = args.pair
    for k in (i, j):
        if not 1 <= k <= len(fields):
            raise UsageError(f"field index {k} out of range 1..{len(fields)}")
    br = lie_bracket(fields[i - 1], fields[j - 1])
    return "ok", {"pair": [i, j], "bracket": str(br), "field": br.to_json()}, [f"[e{i}, e{j}] = {br}"]


def cmd_verify(args, rng):
    if args.all:
        reports = verify_all(rng=rng)
        ok = all(r.ok for r in reports)
        lines = [f"{r.entry.name} n={r.n} {_fmt_params(r.params)}{'ok' if r.ok else 'FAIL: ' + str(r.report)}"
                 for r in reports]
        return ("ok" if ok else "fail"), {"results": [r.describe() for r in reports]}, lines
    if args.algebra is None or args.realization is None:
        raise UsageError("verify needs --all or both --algebra and --realization")
    entry = get_entry(args.algebra, args.realization)
    assignments = [_params(args.param)] if args.param or not entry.params else entry.param_assignments()
    reports = [verify_entry(entry, args.n, p, rng) for p in assignments]
    ok = all(r.ok for r in reports)
    lines = [f"{r.entry.name} n={r.n} {_fmt_params(r.params)}{'ok' if r.ok else 'FAIL: ' + str(r.report)}"
             for r in reports]
    return ("ok" if ok else "fail"), {"results": [r.describe() for r in reports]}, lines


def _fmt_params(params) -> str:
    return "".join(f"{k}={v} " for k, v in sorted(params.items()))


def _constants_from_fields(fields, rng):
    m = len(fields)
    brackets = {}
    for i in range(m):
        for j in range(i + 1, m):
            coords = express_in_span(lie_bracket(fields[i], fields[j]), fields, rng)
            if coords is None:
                return None, (i + 1, j + 1)
            brackets[(i + 1, j + 1)] = {k + 1: q for k, q in enumerate(coords) if q}
    return StructureConstants.from_brackets(m, brackets), None


def identify_path(path: str, rng) -> tuple[str, dict, list[str]]:
    text = _read(path)
    fields = None
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = None
    if isinstance(data, dict):
        try:
            sc = StructureConstants.from_json(data)
        except (KeyError, ValueError, TypeError) as exc:
            raise UsageError(f"bad structure-constant file: {exc}") from None
    else:
        fields = parse_field_list(text)
        if not fields:
            raise UsageError(f"{path} holds no fields")
        sc, bad = _constants_from_fields(fields, rng)
        if sc is None:
            i, j = bad
            msg = f"fields do not close under the bracket: [e{i}, e{j}] is not a constant combination"
            return "fail", {"tag": None, "closed": False, "pair": [i, j]}, [msg]
    report = validate(sc)
    if not report.ok:
        return "fail", {"tag": None, "closed": True, "violation": str(report)}, [f"not a Lie algebra: {report}"]
    tag = identify(sc)
    payload = {"tag": tag.value, "closed": True, "constants": sc.to_json()}
    lines = [f"algebra: {tag.value}"]
    if fields is not None and tag != AlgebraTag.UNKNOWN:
        rank = generic_rank(fields, rng)
        n = max(f.n for f in fields)
        candidates = [e.index for e in list_catalog(tag)
                      if e.n_min <= n and generic_rank(e.instantiate(e.n_min, _first(e)), rng) == rank]
        payload.update({"generic_rank": rank, "candidates": candidates})
        lines.append(f"generic rank {rank}; catalog candidates: "
                     + (", ".join(f"R({tag.value},{k})" for k in candidates) or "none"))
    return ("fail" if tag == AlgebraTag.UNKNOWN else "ok"), payload, lines


def _first(entry):
    assignments = entry.param_assignments()
    return assignments[-1] if assignments else {}


def cmd_identify(args, rng):
    return identify_path(args.path, rng)


def cmd_catalog(args, rng):
    entries = list_catalog(args.algebra)
    lines = []
    for e in entries:
        params = "; ".join(f"{p} in {{{', '.join(str(v) for v in vals)}}}" for p, vals in e.params.items())
        lines.append(f"{e.name}  n_min={e.n_min}" + (f"  {params}" if params else ""))
        lines += [f"    {f}" for f in e.fields]
    return "ok", {"entries": [e.describe() for e in entries]}, lines


def cmd_killing(args, rng):
    if (args.algebra is None) == (args.constants is None):
        raise UsageError("killing needs exactly one of --algebra or --constants")
    if args.algebra is not None:
        sc = ALGEBRAS[AlgebraTag(args.algebra)]
    else:
        try:
            sc = StructureConstants.from_json(_read(args.constants))
        except (KeyError, ValueError, TypeError) as exc:
            raise UsageError(f"bad structure-constant file: {exc}") from None
    report = validate(sc)
    if not report.ok:
        return "fail", {"violation": str(report)}, [f"not a Lie algebra: {report}"]
    K = killing_form(sc)
    sig = signature(K)
    lines = ["K ="] + ["  [" + ", ".join(f"{str(x):>5}" for x in row) + "]" for row in K]
    lines.append(f"signature (p, q, null) = {sig}")
    return "ok", {"killing": _matrix_str(K), "signature": list(sig)}, lines


def cmd_pushforward(args, rng):
    fields = _load_fields(args.fields, args.n)
    if args.map == "sl2-preserving":
        f = [parse_expr(v, 0) for v in (args.f1, args.f2, args.f3)]
        try:
            tp = proofcheck.TransformParams(*f)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        pmap = proofcheck.sl2_preserving_map(tp)
        if any(X.n != 3 for X in fields):
            raise UsageError("the sl(2,R) form-preserving map acts on n = 3")
        pushed = [pushforward(X, pmap) for X in fields]
        lines = [f"e{i} -> {Y}" for i, Y in enumerate(pushed, start=1)]
        return "ok", {"fields": [str(Y) for Y in pushed]}, lines
    if args.target is None:
        raise UsageError(f"--map {args.map} is numeric and needs --target")
    targets = _load_fields(args.target)
    if args.map == "stereographic":
        pmap, sampler = proofcheck.stereographic_map(), proofcheck._stereo_sampler
    else:
        pmap, sampler = proofcheck.spherical_map(), proofcheck._sphere_sampler
    fields = [X.pad(pmap.n) if X.n < pmap.n else X for X in fields]
    targets = [Y.pad(pmap.n_out) if Y.n < pmap.n_out else Y for Y in targets]
    perm, res, res_id = match_basis(fields, targets, pmap, args.samples, rng, sampler)
    status = "ok" if res <= args.tol else "fail"
    payload = {"residual": res, "identity_order_residual": res_id, "samples": args.samples,
               "permutation": [[i + 1, j + 1, s] for i, (j, s) in enumerate(perm)]}
    lines = [f"best signed matching: {proofcheck._fmt_perm(perm)}",
             f"residual {res:.3e} (unpermuted {res_id:.3e}) over {args.samples} samples"]
    return status, payload, lines


def cmd_flow(args, rng):
    fields = _load_fields(args.fields, args.n)
    if not 1 <= args.index <= len(fields):
        raise UsageError(f"field index {args.index} out of range 1..{len(fields)}")
    X = fields[args.index - 1]
    try:
        p = [float(v) for v in args.point.split(",")]
    except ValueError:
        raise UsageError(f"--point expects comma-separated numbers, got {args.point!r}") from None
    if len(p) != X.n:
        raise UsageError(f"--point has {len(p)} coordinates, the field lives on n = {X.n}")
    try:
        end = flow_rk4(X, p, args.eps, args.steps)
    except SingularPointError as exc:
        return "fail", {"error": str(exc)}, [f"flow failed: {exc}"]
    return "ok", {"point": [float(v) for v in end]}, ["(" + ", ".join(f"{v:.12g}" for v in end) + ")"]


def cmd_proofcheck(args, rng):
    try:
        reports = proofcheck.run_suite(args.name, args.trials, args.seed)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    ok = all(r.ok for r in reports)
    lines = []
    for r in reports:
        res = "" if r.residual is None else f" residual={r.residual:.3e}"
        lines.append(f"{r.check}: {r.status}{res} samples={r.samples}")
        lines += [f"    {d}" for d in r.discrepancies]
    return ("ok" if ok else "fail"), {"checks": [r.to_json() for r in reports]}, lines


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the machine-readable report")
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default ${SEED_ENV} or 0)")
    common.add_argument("--timing", action="store_true", help="add elapsed_ms to the report")

    parser = argparse.ArgumentParser(prog="lierealize", description="Realizations of small Lie algebras by vector fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bracket", parents=[common], help="Lie bracket of two fields from a file")
    p.add_argument("--fields", required=True)
    p.add_argument("--pair", type=int, nargs=2, required=True, metavar=("I", "J"))
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("verify", parents=[common], help="verify catalog realizations")
    p.add_argument("--algebra", choices=[t.value for t in ALGEBRAS])
    p.add_argument("--realization", type=int)
    p.add_argument("--param", action="append", metavar="NAME=VALUE")
    p.add_argument("--n", type=int)
    p.add_argument("--all", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("identify", parents=[common], help="identify constants (JSON) or a field list")
    p.add_argument("path")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("catalog", parents=[common], help="catalog queries")
    p.add_argument("action", choices=["list"])
    p.add_argument("--algebra", choices=[t.value for t in ALGEBRAS])
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("killing", parents=[common], help="Killing form and its signature")
    p.add_argument("--algebra", choices=[t.value for t in ALGEBRAS])
    p.add_argument("--constants")
    p.set_defaults(func=cmd_killing)

    p = sub.add_parser("pushforward", parents=[common], help="push fields through a built-in map")
    p.add_argument("--fields", required=True)
    p.add_argument("--map", required=True, choices=["sl2-preserving", "stereographic", "spherical"])
    p.add_argument("--f1", default="0")
    p.add_argument("--f2", default="1")
    p.add_argument("--f3", default="0")
    p.add_argument("--target")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_pushforward)

    p = sub.add_parser("flow", parents=[common], help="RK4 flow of one field")
    p.add_argument("--fields", required=True)
    p.add_argument("--index", type=int, default=1)
    p.add_argument("--point", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--steps", type=int)
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("proofcheck", parents=[common], help="mechanical proof checks")
    p.add_argument("name", help=f"one of {', '.join(proofcheck.SUITES)} or all")
    p.add_argument("--trials", type=int)
    p.set_defaults(func=cmd_proofcheck)
    return parser


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    try:
        if args.seed is None:
            args.seed = _default_seed()
        rng = np.random.default_rng(args.seed)
        status, payload, lines = args.func(args, rng)
    except (UsageError, ParseError, CatalogError) as exc:
        print(f"lierealize {args.command}: error: {exc}", file=sys.stderr)
        return 2
    report = {"command": args.command, "status": status, "payload": payload, "seed": args.seed}
    if args.timing:
        report["elapsed_ms"] = round((time.perf_counter() - start) * 1000, 3)
    if args.json:
        print(json.dumps(report, indent=2, sort_keys=True), file=stdout)
    else:
        for line in lines:
            print(line, file=stdout)
        if args.timing:
            print(f"({report['elapsed_ms']} ms)", file=stdout)
    return 0 if status == "ok" else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
