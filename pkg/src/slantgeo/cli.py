"""Command-line front end: catalog listing, classification, suite runs.

Exit codes: 0 all checks passed, 1 at least one check failed, 2 input or
usage error, 3 numeric failure (rank loss, tangency loss, eigensolver).
Identical invocations produce byte-identical output.
"""

from __future__ import annotations

import argparse
import sys

from . import catalog
from .decomp import Classification, EigenError, classify
from .dsl import ImmersionSpec, SpecError, eval_constant_expr, parse_spec
from .immersion import ImmersionError
from .jets import JetDomainError
from .report import CheckReport, Tolerances, json_dumps, report_to_dict, report_to_text
from .suites import SUITE_IDS, SuiteError, run_all, run_suite

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="slantgeo",
        description="Verify slant-type submanifold geometry in R^(2n+1).")
    sub = top.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", help="list built-in immersions")

    def add_common(p: argparse.ArgumentParser) -> None:
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--spec", metavar="FILE", help="immersion description file")
        src.add_argument("--example", metavar="NAME", help="built-in catalog entry")
        p.add_argument("--set", metavar="K=V", action="append", default=[],
                       help="override a catalog parameter; V may be a constant "
                            "expression such as pi/6")
        p.add_argument("--points", type=int, default=16)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--tol-algebraic", type=float, default=None)
        p.add_argument("--tol-derivative", type=float, default=None)
        p.add_argument("--tol-fd-oracle", type=float, default=None)
        p.add_argument("--tol-angle-constancy", type=float, default=None)
        p.add_argument("--tol-cluster-gap", type=float, default=None)

    pc = sub.add_parser("classify", help="classify an immersion in the taxonomy")
    add_common(pc)

    pv = sub.add_parser("verify", help="run verification suites")
    add_common(pv)
    pv.add_argument("--suite", default="all",
                    help="suite id or 'all' (known: %s)" % ", ".join(SUITE_IDS))
    return top


def _tolerances(args: argparse.Namespace) -> Tolerances:
    base = Tolerances()
    kwargs = {}
    for flag, name in (("tol_algebraic", "algebraic"), ("tol_derivative", "derivative"),
                       ("tol_fd_oracle", "fd_oracle"),
                       ("tol_angle_constancy", "angle_constancy"),
                       ("tol_cluster_gap", "cluster_gap")):
        value = getattr(args, flag)
        kwargs[name] = value if value is not None else getattr(base, name)
    return Tolerances(**kwargs)


def _load_spec(args: argparse.Namespace) -> tuple[str, ImmersionSpec]:
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise SpecError(f"--set expects K=V, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = eval_constant_expr(value.strip())
    if args.example is not None:
        entry = catalog.get_entry(args.example)
        try:
            text = entry.text(**overrides)
        except KeyError as err:
            raise SpecError(str(err)) from err
        return entry.name, parse_spec(text)
    if overrides:
        raise SpecError("--set only applies to catalog entries")
    try:
        with open(args.spec, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise SpecError(f"cannot read {args.spec}: {err.strerror}") from err
    name = args.spec.rsplit("/", 1)[-1]
    if name.endswith(".txt"):
        name = name[:-4]
    return name, parse_spec(text)


def _spec_header(name: str, spec: ImmersionSpec) -> dict:
    return {"name": name, "ambient_dim": spec.ambient_dim, "params": list(spec.params)}


def _classification_dict(c: Classification) -> dict:
    return {
        "label": c.label,
        "dims": list(c.dims),
        "angles": sorted(c.angles),
        "constancy_residual": c.constancy_residual,
    }


def _document(name: str, spec: ImmersionSpec, args: argparse.Namespace,
              tol: Tolerances, classification: Classification | None,
              reports: list[CheckReport]) -> dict:
    return {
        "spec": _spec_header(name, spec),
        "classification": None if classification is None
        else _classification_dict(classification),
        "suites": [report_to_dict(r) for r in reports],
        "config": {"points": args.points, "seed": args.seed,
                   "tolerances": tol.as_dict()},
    }


def _emit(out: str) -> None:
    sys.stdout.write(out)
    if not out.endswith("\n"):
        sys.stdout.write("\n")


def emit_report(document: dict, fmt: str) -> str:
    """Render the result document as canonical JSON or a human table."""
    if fmt == "json":
        return json_dumps(document)
    lines = []
    spec = document["spec"]
    lines.append(f"spec: {spec['name']}  ambient R^{spec['ambient_dim']}  "
                 f"params ({', '.join(spec['params'])})")
    cls = document["classification"]
    if cls is not None:
        angles = ", ".join(f"{a:.12f}" for a in cls["angles"])
        lines.append(f"classification: {cls['label']}")
        lines.append(f"  dims (D, D1, D2): {tuple(cls['dims'])} plus the Reeb direction")
        lines.append(f"  angles (rad, ascending): [{angles}]")
        lines.append(f"  constancy residual: {cls['constancy_residual']:.3e}")
    for suite in document["suites"]:
        lines.append(_suite_text(suite))
    cfg = document["config"]
    lines.append(f"config: points={cfg['points']} seed={cfg['seed']}")
    return "\n".join(lines)


def _suite_text(suite: dict) -> str:
    head = f"suite {suite['id']}: {suite['status'].upper()}"
    if suite.get("note"):
        head += f"  [{suite['note']}]"
    rows = [head]
    for r in suite["identities"]:
        flag = "pass" if r["pass"] else "FAIL"
        row = (f"  {r['id']:<36} {flag}  residual={r['max_residual']:.3e}"
               f"  tol={r['tolerance']:.1e}")
        if r.get("note"):
            row += f"  [{r['note']}]"
        rows.append(row)
    return "\n".join(rows)


def _cmd_catalog() -> int:
    lines = []
    for entry in catalog.ENTRIES:
        slots = " ".join(f"{s.name}={s.default!r}" for s in entry.slots)
        lines.append(f"{entry.name:<18} {slots:<34} {entry.summary}")
    _emit("\n".join(lines))
    return EXIT_OK


def _cmd_classify(args: argparse.Namespace) -> int:
    tol = _tolerances(args)
    name, spec = _load_spec(args)
    c = classify(spec, count=args.points, seed=args.seed, tol=tol)
    doc = _document(name, spec, args, tol, c, [])
    _emit(emit_report(doc, args.format))
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    tol = _tolerances(args)
    name, spec = _load_spec(args)
    if args.suite == "all":
        reports = run_all(spec, count=args.points, seed=args.seed, tol=tol)
    else:
        reports = [run_suite(spec, args.suite, count=args.points, seed=args.seed,
                             tol=tol)]
    doc = _document(name, spec, args, tol, None, reports)
    _emit(emit_report(doc, args.format))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code not in (0, None) else EXIT_OK
    try:
        if args.command == "catalog":
            return _cmd_catalog()
        if args.command == "classify":
            return _cmd_classify(args)
        if args.command == "verify":
            return _cmd_verify(args)
        raise AssertionError("unreachable")
    except (ImmersionError, EigenError, JetDomainError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SpecError, SuiteError, KeyError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
