"""Command-line surface.

Subcommands cover the whole library: template/cosets inspection, the
projection and expansion constructions, certificate search and
development, verification of grid and design files, format conversion,
compositions, bound calculators, and plan search/execution.

Exit codes: 0 success or valid, 1 invalid-design verdict, 2 usage
error, 3 search exhausted (or nothing found in the requested range).
The HMOLS_BUDGET environment variable sets the default search budget;
--jobs caps worker counts without affecting output bytes (verification
is deterministic either way).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import compose as cp
from . import cyclotomic as cy
from . import designs as dz
from . import formats
from . import planner as pl
from .errors import Exhausted, HmolsError, NoneInInterval, NoPlan

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_EXHAUSTED = 3


def _default_budget() -> int:
    try:
        return int(os.environ.get("HMOLS_BUDGET", cy.DEFAULT_BUDGET))
    except ValueError:
        return cy.DEFAULT_BUDGET


def _print_verdict(report, as_json: bool, label: str) -> int:
    if as_json:
        doc = {"target": label, "valid": report.valid,
               "violations": [[kind, list(w)] for kind, w in report.violations]}
        print(json.dumps(doc, sort_keys=True))
    elif report.valid:
        print(f"{label}: valid")
    else:
        print(f"{label}: INVALID ({len(report.violations)} violations)")
        for kind, witness in report.violations[:20]:
            print(f"  {kind} {witness}")
        if len(report.violations) > 20:
            print(f"  ... and {len(report.violations) - 20} more")
    return EXIT_OK if report.valid else EXIT_INVALID


def _load_any(path: str):
    text = Path(path).read_text()
    if path.endswith(".json"):
        return formats.design_loads(text)
    return formats.grid_loads(text)


def _verify_obj(obj):
    if isinstance(obj, dz.LatinSquare):
        return dz.verify_latin(obj)
    if isinstance(obj, dz.HoleyLatinSquareSet):
        return dz.verify_hmols(obj)
    if isinstance(obj, dz.IncompleteMolsSet):
        return dz.verify_imols(obj)
    return dz.verify_design(obj)


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommand handlers -----------------------------------------------------


def _cmd_template(args) -> int:
    t = cy.template(args.h, args.d)
    for row in t.entries:
        print(" ".join(str(int(x)) for x in row))
    return EXIT_OK


def _cmd_project(args) -> int:
    td = cy.td_projection(args.h, args.d, args.k, cols=args.cols)
    _write_or_print(formats.design_dumps(td), args.out)
    return EXIT_OK


def _cmd_cosets(args) -> int:
    t = cy.template(args.h, args.d)
    cols = args.cols if args.cols else list(range(min(args.k or t.size, t.size)))
    table = cy.allowed_cosets(t, cols)
    for (i, j, r, s), allowed in sorted(table.allowed.items()):
        classes = ",".join(str(c) for c in sorted(allowed))
        print(f"blocks {i + 1},{j + 1} cols {cols[r]},{cols[s]}: {classes}")
    return EXIT_OK


def _solution_from_cert(cert):
    """Rebuild a validated solution; recovers the column assignment by the
    complete matching search when the certificate omits it."""
    if cert.get("col_selection") is None:
        t = cy.template(cert["h"], cert["d"])
        assign = cy.match_columns(t, cert["u_vectors"], cert["q"])
        positions = [p for p in range(t.size)
                     if cert["u_vectors"][0][p] is not None]
        u = [[vec[p] for p in positions] for vec in cert["u_vectors"]]
    else:
        assign, u = cert["col_selection"], cert["u_vectors"]
    return cy.verify_uvectors(cert["h"], cert["d"], assign, cert["q"], u,
                              seed=cert.get("seed"))


def _cmd_search(args) -> int:
    budget = args.budget if args.budget is not None else _default_budget()
    if args.verify:
        sol = _solution_from_cert(formats.cert_loads(Path(args.verify).read_text()))
        rep = cy.verify_rdm(cy.assemble_rdf(sol))
        if not rep.valid:
            return _print_verdict(rep, args.json, "certificate")
        _write_or_print(formats.cert_dumps(sol.to_cert()), args.out)
        print(f"certificate valid: columns {list(sol.col_selection)}",
              file=sys.stderr)
        return EXIT_OK
    if None in (args.h, args.d, args.q) or not args.cols:
        print("error: search needs h d q --cols ... (or --verify CERT)",
              file=sys.stderr)
        return EXIT_USAGE
    sol = cy.search_uvectors(args.h, args.d, args.cols, args.q,
                             seed=args.seed, budget=budget)
    _write_or_print(formats.cert_dumps(sol.to_cert()), args.out)
    return EXIT_OK


def _cmd_develop(args) -> int:
    sol = _solution_from_cert(formats.cert_loads(Path(args.cert).read_text()))
    htd = cy.develop_rdf(cy.assemble_rdf(sol))
    rep = dz.verify_design(htd)
    label = f"HTD({htd.k},{htd.hole_size}^{htd.hole_count})"
    if args.out and rep.valid:
        Path(args.out).write_text(formats.design_dumps(htd))
    return _print_verdict(rep, args.json, label)


def _cmd_expand(args) -> int:
    td = _load_any(args.tdfile)
    budget = args.budget if args.budget is not None else _default_budget()
    htd = cy.expand_td_to_htd(td, args.q, seed=args.seed, budget=budget)
    _write_or_print(formats.design_dumps(htd), args.out)
    return EXIT_OK


def _cmd_verify(args) -> int:
    obj = _load_any(args.file)
    return _print_verdict(_verify_obj(obj), args.json, args.file)


def _cmd_convert(args) -> int:
    obj = _load_any(args.file)
    if args.to == "htd":
        if isinstance(obj, dz.HoleyLatinSquareSet):
            out = dz.hmols_to_htd(obj)
        elif isinstance(obj, dz.IncompleteMolsSet):
            out = dz.imols_to_itd(obj)
        else:
            raise HmolsError("convert --to htd needs a square-set grid")
        _write_or_print(formats.design_dumps(out), args.out)
    else:
        if not isinstance(obj, dz.BlockDesign):
            raise HmolsError("convert --to hmols needs a design file")
        hm = dz.htd_to_hmols(obj)
        _write_or_print(formats.grid_dumps(hm), args.out)
    return EXIT_OK


def _cmd_compose(args) -> int:
    if args.op == "product":
        d1, d2 = _load_any(args.ingredients[0]), _load_any(args.ingredients[1])
        out = cp.td_product(d1, d2)
    elif args.op == "diag":
        a, b, c = (_load_any(f) for f in args.ingredients[:3])
        out = cp.diag_product(a, b, c)
    elif args.op == "wilson":
        r, a, b, e = (_load_any(f) for f in args.ingredients[:4])
        f_ing = _load_any(args.ingredients[4]) if len(args.ingredients) > 4 else None
        out = cp.wilson_compose(r, a, b, e, f_ing, args.u)
    else:
        names = args.ingredients
        r2, dm, dm1, dm2 = (_load_any(f) for f in names[:4])
        du = _load_any(names[4]) if len(names) > 4 else None
        out = cp.itd_truncate_compose(args.k, args.m, args.t, args.u, args.v,
                                      r2=r2, dm=dm, dm1=dm1, dm2=dm2, du=du)
    _write_or_print(formats.design_dumps(out), args.out)
    return EXIT_OK


def _cmd_plan(args) -> int:
    reg = pl.Registry.from_json(Path(args.registry).read_text())
    tree = pl.plan_hmols(args.h, args.k, args.n, reg)
    _write_or_print(tree.to_json(), args.out)
    return EXIT_OK


def _cmd_execute(args) -> int:
    reg = pl.Registry.from_json(Path(args.registry).read_text())
    tree = pl.PlanTree.from_json(Path(args.plan).read_text())
    budget = args.budget if args.budget is not None else _default_budget()
    out = pl.execute_plan(tree, reg, seed=args.seed, budget=budget)
    rep = dz.verify_design(out)
    if args.out and rep.valid:
        Path(args.out).write_text(formats.design_dumps(out))
    return _print_verdict(rep, args.json,
                          f"HTD({out.k},{out.hole_size}^{out.hole_count})")


def _cmd_bound(args) -> int:
    if args.calc == "upper":
        print(pl.naive_upper_bound(args.a, args.b))
    elif args.calc == "lambda":
        print(pl.lambda_hk(args.a, args.b))
    elif args.calc == "asymptotic":
        value = pl.asymptotic_floor(args.a, args.b, args.delta)
        print(f"{value} (asymptotic, not a certificate)")
    elif args.calc == "frobenius":
        x, y = pl.frobenius_split(args.a, args.b, args.c, args.n)
        print(f"{x} {y}")
    else:
        print(pl.find_prime_1modM(args.a, args.b, args.c))
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hmols",
                                 description="holey MOLS and transversal "
                                             "design toolkit")
    ap.add_argument("--jobs", type=int, default=1,
                    help="worker cap; output bytes are identical for any value")
    ap.add_argument("--json", action="store_true",
                    help="machine-readable verdicts on stdout")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("template", help="print the dot-product template")
    p.add_argument("h", type=int)
    p.add_argument("d", type=int)
    p.set_defaults(fn=_cmd_template)

    p = sub.add_parser("project", help="TD of index h^(d-1) on k groups")
    p.add_argument("h", type=int)
    p.add_argument("d", type=int)
    p.add_argument("k", type=int)
    p.add_argument("--cols", type=int, nargs="*", default=None)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_project)

    p = sub.add_parser("cosets", help="allowed coset table")
    p.add_argument("h", type=int)
    p.add_argument("d", type=int)
    p.add_argument("--cols", type=int, nargs="*", default=None)
    p.add_argument("--k", type=int, default=None)
    p.set_defaults(fn=_cmd_cosets)

    p = sub.add_parser("search", help="search difference vectors over GF(q)")
    p.add_argument("h", type=int, nargs="?")
    p.add_argument("d", type=int, nargs="?")
    p.add_argument("q", type=int, nargs="?")
    p.add_argument("--cols", type=int, nargs="*", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--verify", help="validate a certificate file instead")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_search)

    p = sub.add_parser("develop", help="rebuild and verify an HTD from a certificate")
    p.add_argument("cert")
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_develop)

    p = sub.add_parser("expand", help="expand an indexed TD over GF(q)")
    p.add_argument("tdfile")
    p.add_argument("q", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_expand)

    p = sub.add_parser("verify", help="verify a grid or design file")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("convert", help="convert between square sets and designs")
    p.add_argument("file")
    p.add_argument("--to", choices=("hmols", "htd"), required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_convert)

    p = sub.add_parser("compose", help="run a composition on design files")
    p.add_argument("op", choices=("product", "diag", "wilson", "truncate"))
    p.add_argument("ingredients", nargs="+")
    p.add_argument("--u", type=int, default=0)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--v", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_compose)

    p = sub.add_parser("plan", help="search for a construction plan")
    p.add_argument("h", type=int)
    p.add_argument("k", type=int)
    p.add_argument("n", type=int)
    p.add_argument("--registry", required=True)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_plan)

    p = sub.add_parser("execute", help="execute a plan against a registry")
    p.add_argument("plan")
    p.add_argument("--registry", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_execute)

    p = sub.add_parser("bound", help="bound calculators")
    p.add_argument("calc", choices=("upper", "asymptotic", "lambda",
                                    "frobenius", "prime"))
    p.add_argument("a", type=int)
    p.add_argument("b", type=int)
    p.add_argument("c", type=int, nargs="?")
    p.add_argument("n", type=int, nargs="?")
    p.add_argument("--delta", type=float, default=2.5)
    p.set_defaults(fn=_cmd_bound)

    return ap


def run(argv) -> int:
    """Dispatch one invocation; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.fn(args)
    except (Exhausted, NoPlan, NoneInInterval) as exc:
        print(f"exhausted: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (HmolsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
