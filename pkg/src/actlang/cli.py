"""``act`` command line: check, run, verify, obligations, explore, metatheory.

Exit codes: 0 success, 1 parse or type error (or a failed property suite),
2 obligation counterexample or failed verification, 3 I/O or malformed
input.  ``run`` reports evaluation failures with codes 4 to 8.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import syntax as S
from .bounds import BoundsConfig
from .diagnostics import ActError, format_human
from .entailment import discharge, export_obligation, is_exportable, solve_smt
from .parser import parse_file
from .semantics import EvalError, eval_ctor, eval_trans
from .typecheck import check_spec
from .values import Addr, state_from_json, state_to_json, value_to_json
from .valuetyping import store_well_typed, typed_locations
from .verifier import SCHEMA_VERSION, ExploreConfig, explore, verify
from .wellfounded import build_prec, check_wf

EXIT_OK, EXIT_TYPE, EXIT_CEX, EXIT_IO = 0, 1, 2, 3
RUN_EXIT = {"PreconditionFailed": 4, "NoCaseMatched": 5, "MultipleCasesMatched": 6, "ResourceLimit": 8}
RUN_EXIT_STUCK = 7


def _color_enabled(stream) -> bool:
    if os.environ.get("ACT_COLOR", "").lower() in ("0", "no", "never", "false", "off"):
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _paint(text: str, code: str, stream=None) -> str:
    stream = stream or sys.stdout
    return f"\033[{code}m{text}\033[0m" if _color_enabled(stream) else text


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _bounds(args) -> BoundsConfig:
    extra = ()
    if getattr(args, "int_samples", None):
        extra = tuple(int(x, 0) for x in args.int_samples.split(",") if x.strip())
    return BoundsConfig(extra_int_samples=extra, addr_domain=args.addr_domain, map_footprint=args.map_footprint)


class _IOFailure(Exception):
    pass


def _load(path: str):
    try:
        return parse_file(path)
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc.strerror or exc}") from exc


def _checked(path: str):
    return check_spec(_load(path))


# ---------------------------------------------------------------------------
# check / obligations


def _verdicts(result, bounds: BoundsConfig):
    return [(ob, discharge(ob, bounds)) for ob in result.obligations]


def cmd_check(args) -> int:
    code = EXIT_OK
    reports = []
    for path in args.paths:
        rep = {"file": path, "diagnostics": [], "obligations": []}
        try:
            result = _checked(path)
        except _IOFailure as exc:
            rep["diagnostics"].append({"severity": "error", "message": str(exc), "file": path,
                                       "line": None, "col": None, "rule": None})
            code = max(code, EXIT_IO)
            reports.append(rep)
            if not args.json:
                print(f"{path}: error: {exc}", file=sys.stderr)
            continue
        except ActError as exc:
            rep["diagnostics"] = [d.to_json() for d in exc.diagnostics]
            code = max(code, EXIT_TYPE)
            reports.append(rep)
            if not args.json:
                print(_paint(format_human(exc.diagnostics), "31", sys.stderr), file=sys.stderr)
            continue
        bounds = _bounds(args)
        failed = False
        for ob, v in _verdicts(result, bounds):
            entry = {"hash": ob.hash, "rule": ob.rule, "kind": ob.kind, "location": ob.location(), **v.to_json()}
            rep["obligations"].append(entry)
            if not v.ok:
                if v.name == "Counterexample" or not args.assume_obligations:
                    failed = True
                if not args.json:
                    tag = "warning" if args.assume_obligations and v.name != "Counterexample" else "error"
                    print(f"{ob.location()}: {tag} [{ob.rule}]: obligation {ob.hash} {v.name}: "
                          f"{json.dumps(v.to_json(), sort_keys=True)}", file=sys.stderr)
        if failed:
            code = max(code, EXIT_CEX)
        _extra_dumps(args, result, rep)
        reports.append(rep)
        if not args.json:
            n = len(rep["obligations"])
            status = _paint("ok", "32") if not failed else _paint("FAILED", "31")
            print(f"{path}: {status} ({len(result.spec.contracts)} contracts, {n} obligations)")
    if args.json:
        print(_dump({"schemaVersion": SCHEMA_VERSION, "files": reports}))
    return code


def _extra_dumps(args, result, rep):
    human = not args.json
    if args.dump_sigma:
        rep["sigma"] = result.sigma.to_json()
        if human:
            print(_dump(rep["sigma"]))
    if args.dump_typed:
        rep["typed"] = S.pretty(result.spec)
        if human:
            print(rep["typed"], end="")
    if args.dump_obligations:
        rep["obligationBodies"] = [ob.to_json() for ob in result.obligations]
        if human:
            print(_dump(rep["obligationBodies"]))
    if args.dump_prec:
        g = build_prec(result.sigma)
        rep["prec"] = {"edges": sorted([list(e) for e in g.edges]), "cycle": check_wf(g)}
        if human:
            print(g.to_dot(), end="")


def cmd_obligations(args) -> int:
    try:
        result = _checked(args.path)
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ActError as exc:
        print(format_human(exc.diagnostics), file=sys.stderr)
        return EXIT_TYPE
    out_dir = None
    if args.export is not None:
        out_dir = Path(args.export) if args.export else Path(str(args.path) + ".obl")
        out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    bounds = _bounds(args)
    code = EXIT_OK
    for ob in result.obligations:
        row = {"hash": ob.hash, "rule": ob.rule, "kind": ob.kind, "location": ob.location(),
               "obligation": ob.to_json()}
        text = export_obligation(ob)
        row["exportable"] = is_exportable(text)
        if out_dir is not None:
            (out_dir / f"{ob.hash}.smt2").write_text(text)
        if args.solve and row["exportable"]:
            row["solver"] = solve_smt(text) or "unavailable"
        if args.discharge:
            v = discharge(ob, bounds)
            row["verdict"] = v.to_json()
            if not v.ok and (v.name == "Counterexample" or not args.assume_obligations):
                code = EXIT_CEX
        rows.append(row)
    if args.json:
        print(_dump({"schemaVersion": SCHEMA_VERSION, "file": args.path, "obligations": rows}))
    else:
        for row in rows:
            extra = ""
            if "verdict" in row:
                extra += f"  {row['verdict']['verdict']}"
            if "solver" in row:
                extra += f"  solver:{row['solver']}"
            if not row["exportable"]:
                extra += "  (not exportable)"
            print(f"{row['hash']}  {row['rule']:<16} {row['location']}{extra}")
        if out_dir is not None:
            print(f"wrote {len(rows)} files to {out_dir}")
    return code


# ---------------------------------------------------------------------------
# run


def _parse_value(text: str):
    t = text.strip()
    if t in ("true", "false"):
        return t == "true"
    if t.startswith("@"):
        return Addr(int(t[1:], 0))
    return int(t, 0)


def _coerce_arg(v, ty):
    if isinstance(ty, (S.AddressType, S.ContractAddr)) and not isinstance(v, Addr):
        if isinstance(v, bool) or v < 0:
            raise ValueError(f"{v!r} is not an address")
        return Addr(v)
    return v


def _read_state(path: Optional[str]):
    if path is None:
        return state_from_json({})
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
        return state_from_json(json.loads(text))
    except OSError as exc:
        raise _IOFailure(f"cannot read {path}: {exc.strerror or exc}") from exc
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise _IOFailure(f"malformed state JSON in {path}: {exc}") from exc


def cmd_run(args) -> int:
    try:
        result = _checked(args.path)
        s = _read_state(args.state)
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ActError as exc:
        print(format_human(exc.diagnostics), file=sys.stderr)
        return EXIT_TYPE
    sigma = result.sigma
    typed = store_well_typed(sigma, s)
    if not typed:
        print(f"error: input state is not well-typed: {typed.describe()}", file=sys.stderr)
        return EXIT_IO
    contract, _, entry = args.entry.partition(".")
    if contract not in sigma.storage:
        print(f"error: unknown contract {contract}", file=sys.stderr)
        return EXIT_IO
    is_ctor = entry in ("", "constructor")
    try:
        node = sigma.cnstr[contract] if is_ctor else sigma.transition(contract, entry)
    except KeyError:
        print(f"error: {contract} has no transition {entry}", file=sys.stderr)
        return EXIT_IO
    try:
        rho = {}
        for item in args.arg or ():
            k, _, v = item.partition("=")
            rho[k] = _parse_value(v)
        for p in node.iface:
            if p.name not in rho:
                raise ValueError(f"missing argument {p.name}")
            rho[p.name] = _coerce_arg(rho[p.name], p.type)
        rho["caller"] = Addr(args.caller)
        rho["origin"] = Addr(args.origin)
        rho["callvalue"] = args.callvalue
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        if is_ctor:
            loc, s2 = eval_ctor(sigma, s, rho, contract, node)
            value = loc
        else:
            if args.loc is None:
                locs = typed_locations(sigma, s, contract)
                if not locs:
                    print(f"error: no {contract} instance in the input state; pass --loc", file=sys.stderr)
                    return EXIT_IO
                loc = locs[0]
            else:
                loc = Addr(args.loc)
            value, s2 = eval_trans(sigma, s, rho, loc, node)
    except EvalError as exc:
        kind = type(exc).__name__
        payload = {"schemaVersion": SCHEMA_VERSION, "ok": False, "failure": kind, "rule": exc.rule,
                   "message": str(exc)}
        if args.json:
            print(_dump(payload))
        else:
            print(f"{kind}: {exc}", file=sys.stderr)
        return RUN_EXIT.get(kind, RUN_EXIT_STUCK)
    out = {"schemaVersion": SCHEMA_VERSION, "ok": True, "value": value_to_json(value), "state": state_to_json(s2)}
    if is_ctor:
        out["loc"] = value.n
    if args.state_out:
        try:
            Path(args.state_out).write_text(_dump(state_to_json(s2)) + "\n")
        except OSError as exc:
            print(f"error: cannot write {args.state_out}: {exc}", file=sys.stderr)
            return EXIT_IO
    if args.json:
        print(_dump(out))
    else:
        print(f"value: {value!r}")
        print(f"state: {json.dumps(state_to_json(s2), sort_keys=True)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify / explore


def _explore_cfg(args) -> ExploreConfig:
    return ExploreConfig(max_depth=args.max_depth, max_states=args.max_states, bounds=_bounds(args))


def cmd_verify(args) -> int:
    try:
        result = _checked(args.path)
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ActError as exc:
        print(format_human(exc.diagnostics), file=sys.stderr)
        return EXIT_TYPE
    bounds = _bounds(args)
    bad_obs = []
    for ob, v in _verdicts(result, bounds):
        if not v.ok and (v.name == "Counterexample" or not args.assume_obligations):
            bad_obs.append({"hash": ob.hash, "rule": ob.rule, "location": ob.location(), **v.to_json()})
        elif not v.ok:
            print(f"warning: obligation {ob.hash} ({ob.rule}) assumed: {v.name}", file=sys.stderr)
    report = verify(result.sigma, result.spec, _explore_cfg(args))
    ok = report.ok and not bad_obs
    if args.json:
        payload = report.to_json()
        payload["ok"] = ok
        payload["obligationFailures"] = bad_obs
        print(_dump(payload))
    else:
        for b in bad_obs:
            print(f"{b['location']}: obligation {b['hash']} ({b['rule']}) {b['verdict']}")
        print(report.describe())
    return EXIT_OK if ok else EXIT_CEX


def cmd_explore(args) -> int:
    try:
        result = _checked(args.path)
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ActError as exc:
        print(format_human(exc.diagnostics), file=sys.stderr)
        return EXIT_TYPE
    ex = explore(result.sigma, _explore_cfg(args))
    depths = {}
    for fp, d in ex.depth.items():
        depths[d] = depths.get(d, 0) + 1
    payload = {"schemaVersion": SCHEMA_VERSION, "states": len(ex.states), "edges": len(ex.edges),
               "truncated": ex.truncated, "statesPerDepth": {str(k): v for k, v in sorted(depths.items())},
               "typingViolations": len(ex.typing_violations)}
    if args.json:
        print(_dump(payload))
    else:
        print(f"bound: {args.max_depth}")
        for k, v in sorted(depths.items()):
            print(f"  depth {k}: {v} states")
        print(f"states: {len(ex.states)}  edges: {len(ex.edges)}  truncated: {ex.truncated}  "
              f"ill-typed: {len(ex.typing_violations)}")
    return EXIT_OK if not ex.typing_violations else EXIT_CEX


# ---------------------------------------------------------------------------
# metatheory


def cmd_metatheory(args) -> int:
    from . import metatheory as M
    from .semantics import mutant

    def go():
        if args.n <= 0:
            return []
        return M.determinism_suite(args.seed, args.n) + M.type_safety_suite(args.seed, args.n)

    if args.mutant:
        with mutant(args.mutant):
            results = go()
    else:
        results = go()
    ok = all(r.ok for r in results)
    if args.json:
        print(_dump({"schemaVersion": SCHEMA_VERSION, "seed": args.seed, "n": args.n, "ok": ok,
                     "suites": [r.to_json() for r in results]}))
    else:
        for r in results:
            status = _paint("pass", "32") if r.ok else _paint("FAIL", "31")
            print(f"{r.name:<24} {status}  checked={r.checked} skipped={r.skipped}")
            for f in r.failures[:1]:
                print("  reproducer:\n    " + f.describe().replace("\n", "\n    "))
        print("ok" if ok else "FAILED")
    return EXIT_OK if ok else EXIT_TYPE


# ---------------------------------------------------------------------------
# argument parsing


def _bounds_flags(p: argparse.ArgumentParser):
    p.add_argument("--int-samples", metavar="N,N,...", help="extra integer samples for bounded checks")
    p.add_argument("--addr-domain", type=int, default=3, metavar="N", help="size of the sampled address set")
    p.add_argument("--map-footprint", type=int, default=2, metavar="N", help="keys materialised per sampled mapping")
    p.add_argument("--assume-obligations", action="store_true",
                   help="treat obligations not shown valid within bounds as warnings (counterexamples still fail)")


def _explore_flags(p: argparse.ArgumentParser):
    p.add_argument("--max-depth", type=int, default=3, metavar="N")
    p.add_argument("--max-states", type=int, default=10_000, metavar="N")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="act", description="Checker, interpreter and bounded verifier for act specs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="parse, type-check and discharge obligations")
    p.add_argument("paths", nargs="+")
    p.add_argument("--json", action="store_true")
    for flag in ("sigma", "typed", "obligations", "prec"):
        p.add_argument(f"--dump-{flag}", action="store_true")
    _bounds_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("obligations", help="list, discharge or export side conditions")
    p.add_argument("path")
    p.add_argument("--json", action="store_true")
    p.add_argument("--export", nargs="?", const="", default=None, metavar="DIR",
                   help="write one .smt2 file per obligation (default DIR: <spec>.obl)")
    p.add_argument("--solve", action="store_true", help="run exported queries through z3 if installed")
    p.add_argument("--discharge", action="store_true", help="also run the bounded check")
    _bounds_flags(p)
    p.set_defaults(func=cmd_obligations)

    p = sub.add_parser("run", help="evaluate one constructor or transition")
    p.add_argument("path")
    p.add_argument("entry", help="Contract.constructor or Contract.transition")
    p.add_argument("--arg", action="append", metavar="NAME=VALUE", help="calldata (ints, true/false, @n)")
    p.add_argument("--state", metavar="FILE", help="input state JSON ('-' for stdin); default empty")
    p.add_argument("--state-out", metavar="FILE")
    p.add_argument("--loc", type=int, help="location of the instance (transitions)")
    p.add_argument("--caller", type=int, default=0)
    p.add_argument("--origin", type=int, default=0)
    p.add_argument("--callvalue", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_run)

    for name, func, helptext in (("verify", cmd_verify, "bounded invariant and postcondition check"),
                                 ("explore", cmd_explore, "enumerate reachable states")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("path")
        p.add_argument("--json", action="store_true")
        _explore_flags(p)
        _bounds_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("metatheory", help="property suites over generated specs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-n", type=int, default=100, help="instances per suite")
    p.add_argument("--mutant", choices=["sequential-updates"], help="run against a deliberately wrong semantics")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_metatheory)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
