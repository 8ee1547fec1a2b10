"""Command line interface: ``verify``, ``builtins`` and ``describe``."""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone

from . import __version__, kernels, manifest, structures
from .checks import CHECKS, Context, run_check
from .report import ERROR, FAIL, PASS

SCHEMA_VERSION = "1.0"
EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def exit_code(statuses) -> int:
    statuses = list(statuses)
    if ERROR in statuses:
        return EXIT_ERROR
    if FAIL in statuses:
        return EXIT_FAIL
    return EXIT_PASS


def _jsonable(obj):
    """Replace non-finite floats and complex numbers so the report is strict JSON."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, complex):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, float):
        if obj != obj:
            return "nan"
        if obj in (float("inf"), float("-inf")):
            return "inf" if obj > 0 else "-inf"
        return obj
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def run(path: str, samples: int | None = None, seed: int | None = None, tol: float | None = None,
        route: str | None = None) -> dict:
    """Load a manifest, run its checks in order and return the report."""
    m = manifest.load(path)
    checks = manifest.check_list(m)
    S, G = manifest.build_structure(m)
    sampling = manifest.sampling_settings(m)
    tols = manifest.tolerance_settings(m)
    partner, B = manifest.build_product(m, S)
    ctx = Context(S, G, count=samples or sampling.get("count", 50),
                  seed=sampling.get("seed", 42) if seed is None else seed,
                  box=(sampling.get("low", -1.0), sampling.get("high", 1.0)),
                  tol=tol if tol is not None else tols.get("tol", 1e-8),
                  axiom_tol=tols.get("axiom_tol", 1e-9), eig_tol=tols.get("eig_tol", 1e-9),
                  route=route or "g_phi", partner=partner, product_B=B)
    results = []
    for name, params in checks:
        if route is not None and "route" in CHECKS[name].params:
            params = {**params, "route": route}
        results.append(run_check(name, ctx, params))
    statuses = [r.status for r in results]
    return _jsonable({
        "schema_version": SCHEMA_VERSION,
        "tool": f"gencontact {__version__}",
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "manifest": {"path": str(path), "sha256": m.sha256},
        "provenance": {"seed": ctx.seed, "samples": ctx.count, "box": list(ctx.box), "route": ctx.route,
                       "tolerances": {"tol": ctx.tol, "axiom_tol": ctx.axiom_tol, "eig_tol": ctx.eig_tol},
                       "backend": kernels.BACKEND},
        "structure": S.name,
        "checks": [r.as_dict() for r in results],
        "summary": {s: statuses.count(s) for s in (PASS, FAIL, ERROR)},
        "exit_code": exit_code(statuses),
    })


def _print_summary(report: dict, out) -> None:
    for c in report["checks"]:
        extra = ""
        d = c["details"]
        if "verdict" in d:
            extra = f" [{d['verdict']}]"
        elif "failing_conditions" in d and d["failing_conditions"]:
            extra = f" [failing conditions {d['failing_conditions']}]"
        elif "error" in d:
            extra = f" [{d['error']}]"
        res = c["max_residual"]
        res_txt = "" if res is None else f" max_residual={res:.3e}" if isinstance(res, float) else f" {res}"
        print(f"{c['status']:5s} {c['name']}{extra}{res_txt}", file=out)


def cmd_verify(args) -> int:
    try:
        report = run(args.manifest, args.samples, args.seed, args.tol, args.route)
    except manifest.ManifestError as exc:
        print(f"{args.manifest}: manifest error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"cannot read manifest: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # a structure that cannot be built is an ERROR, not a crash
        print(f"{args.manifest}: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.json:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
        if args.json == "-":
            sys.stdout.write(text)
        else:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(text)
    if args.json != "-":
        _print_summary(report, sys.stdout)
    return report["exit_code"]


def list_builtins() -> str:
    return "\n".join(f"{name:22s} {desc}" for name, desc in structures.BUILTINS.items())


def describe_check(name: str) -> str:
    if name not in CHECKS:
        raise KeyError(f"unknown check {name!r}; known: {', '.join(CHECKS)}")
    entry = CHECKS[name]
    params = f"\nparameters: {', '.join(entry.params)}" if entry.params else ""
    return f"{name}: {entry.summary}{params}"


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gencontact", description="Verify generalized contact structures on charts.")
    sub = ap.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="run the checks listed in a manifest")
    v.add_argument("manifest")
    v.add_argument("--samples", type=_positive_int, help="number of sample points (default 50)")
    v.add_argument("--seed", type=int, help="sampling seed (default 42)")
    v.add_argument("--tol", type=_positive_float, help="integrability tolerance (default 1e-8)")
    v.add_argument("--route", choices=("phi", "g_phi"), help="endomorphism used for the canonical bivector")
    v.add_argument("--json", metavar="OUT", help="write the JSON report to OUT ('-' for stdout)")
    v.set_defaults(func=cmd_verify)
    b = sub.add_parser("builtins", help="list the built-in structures")
    b.set_defaults(func=lambda a: print(list_builtins()) or EXIT_PASS)
    d = sub.add_parser("describe", help="describe a check")
    d.add_argument("check")
    d.set_defaults(func=_cmd_describe)
    return ap


def _cmd_describe(args) -> int:
    try:
        print(describe_check(args.check))
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return EXIT_ERROR
    return EXIT_PASS


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
