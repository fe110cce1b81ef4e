"""Command-line front end: ``hce <verb> [options]``.

Exit codes: 0 success, 1 invariant failure (invalid input data or a failed
verdict), 2 usage error (bad flags, unreadable or malformed documents).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import __version__
from .complexes import EquivariantComplex, InvariantError
from .crossed import (
    MODEL_NAMES,
    ConstructionError,
    build_model,
    einf_table,
    four_term,
    h_coeq,
    h_eq,
    hp_crossed,
    hp_manifold,
    sixterm_consistency,
)
from .cyclic import (
    DegreeCapError,
    algebra_einf,
    cyclic_cohomology,
    default_degree_cap,
    hochschild_cohomology,
    periodic_cohomology,
)
from .io import (
    ParseError,
    bicharacter_to_doc,
    complex_to_doc,
    digest,
    element_to_doc,
    fmt_rational,
    load_document,
    parse_bicharacter,
    parse_complex,
    parse_element,
    parse_rational,
    resolve_algebra,
)
from .nctorus import (
    TrigPoly,
    iso_check,
    iso_search,
    lattice_seminorm,
    nondegenerate,
    rho,
    rotation_opnorms,
    trig_seminorm,
)

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2


@dataclass
class Report:
    computation: str
    inputs: dict
    result: dict
    table: list[dict] = field(default_factory=list)
    flags: dict = field(default_factory=dict)
    ok: bool = True

    def to_json(self) -> dict:
        out = {
            "computation": self.computation,
            "input_digest": digest(self.inputs),
            "result": self.result,
            "flags": self.flags,
        }
        if self.table:
            out["table"] = self.table
        return out


def render_json(report: Report) -> str:
    return json.dumps(report.to_json(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if v is None:
        return "-"
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_cell(x) for x in v) + ")"
    return str(v)


def _align(rows: list[list[str]]) -> list[str]:
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    return ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]


def render_text(report: Report) -> str:
    lines = [f"{report.computation}  (input {digest(report.inputs)[:12]})"]
    pairs = [[k, _cell(v)] for k, v in sorted(report.result.items()) if not isinstance(v, dict)]
    pairs += [[k, _cell(v)] for k, v in sorted(report.flags.items()) if not isinstance(v, dict)]
    if pairs:
        lines += _align(pairs)
    if report.table:
        cols = list(report.table[0])
        rows = [cols] + [[_cell(r.get(c)) for c in cols] for r in report.table]
        lines.append("")
        lines += _align(rows)
    return "\n".join(lines) + "\n"


# input helpers ----------------------------------------------------------------


def _model_from_args(args) -> tuple[EquivariantComplex, dict]:
    if args.complex:
        doc, label = load_document(args.complex)
        E = parse_complex(doc, label, require_alpha=True)
    elif args.model:
        params = {"n": args.n} if args.n is not None else {}
        E = build_model(args.model, params)
    else:
        raise UsageError("give --model NAME (with --n for sphere) or --complex FILE")
    return E, complex_to_doc(E)


class UsageError(ValueError):
    pass


def _parse_transform(text: str) -> list[list[int]]:
    try:
        T = json.loads(text)
    except json.JSONDecodeError:
        T = [[int(x) for x in row.split(",")] for row in text.split(";")]
    if not (isinstance(T, list) and len(T) == 3 and all(isinstance(r, list) and len(r) == 3 for r in T)):
        raise UsageError("--transform must be a 3x3 integer matrix, e.g. '1,0,0;0,1,0;0,0,1'")
    return [[int(x) for x in r] for r in T]


def _opnorm_table(path: str | None):
    if path is None:
        return rotation_opnorms, {"table": "rotation (all ones)"}
    doc, label = load_document(path)
    entries = doc.get("entries") if isinstance(doc, dict) else doc
    if not isinstance(entries, list):
        raise ParseError(f"{label}: expected a list of [t, i, \"p/q\"] entries")
    table = {}
    for n, e in enumerate(entries):
        if not isinstance(e, list) or len(e) != 3:
            raise ParseError(f"{label}[{n}]: expected [t, i, \"p/q\"]")
        table[(int(e[0]), int(e[1]))] = parse_rational(e[2], f"{label}[{n}][2]")
    canon = [[t, i, fmt_rational(v)] for (t, i), v in sorted(table.items())]
    return table, {"table": canon}


# verbs ------------------------------------------------------------------------


def _degree_table(args, fn, name: str) -> Report:
    A, doc = resolve_algebra(args.algebra)
    cap = args.degree_cap if args.degree_cap is not None else default_degree_cap(A.dim)
    rows = [{"degree": n, "dim": fn(A, n, cap).dim} for n in range(args.max_degree + 1)]
    return Report(
        name,
        {"algebra": doc, "max_degree": args.max_degree},
        {"dims": [r["dim"] for r in rows]},
        rows,
        {"degree_cap": cap},
    )


def cmd_hochschild(args) -> Report:
    return _degree_table(args, hochschild_cohomology, "hochschild")


def cmd_cyclic(args) -> Report:
    return _degree_table(args, cyclic_cohomology, "cyclic")


def cmd_hp(args) -> Report:
    A, doc = resolve_algebra(args.algebra)
    reports = [periodic_cohomology(A, p, args.window) for p in (0, 1)]
    return Report(
        "hp",
        {"algebra": doc, "window": args.window},
        {"HP0": reports[0].dim, "HP1": reports[1].dim},
        [
            {"parity": r.parity, "dim": r.dim, "total_degree": r.total_degree, "next_window_dim": r.next_window_dim, "stable": r.stable}
            for r in reports
        ],
        {"window": args.window, "stable": all(r.stable for r in reports)},
    )


def cmd_einf_algebra(args) -> Report:
    A, doc = resolve_algebra(args.algebra)
    top = args.max_degree if args.max_degree is not None else max(0, args.window - 3)
    rows = []
    for n in range(top + 1):
        e = algebra_einf(A, n, args.window)
        rows.append({"degree": n, "dim": e.dim, "determined": e.determined, "stable": e.stable})
    det = [r for r in rows if r["determined"]]
    return Report(
        "einf-algebra",
        {"algebra": doc, "window": args.window, "max_degree": top},
        {
            "even_sum": sum(r["dim"] for r in det if r["degree"] % 2 == 0),
            "odd_sum": sum(r["dim"] for r in det if r["degree"] % 2 == 1),
        },
        rows,
        {"window": args.window, "all_determined": len(det) == len(rows), "stable": all(r["stable"] for r in rows)},
    )


def cmd_crossed_einf(args) -> Report:
    E, doc = _model_from_args(args)
    t = einf_table(E, args.max_degree)
    rows = []
    for n, v in enumerate(t.entries):
        rows.append({"degree": n, "einf": v, "h_eq": h_eq(E, n)[0], "h_coeq_prev": h_coeq(E, n - 1)[0] if n else 0})
    return Report(
        "crossed-einf",
        {"model": doc, "max_degree": args.max_degree},
        {"einf": list(t.entries), "HP0": t.hp0, "HP1": t.hp1},
        rows,
    )


def cmd_crossed_hp(args) -> Report:
    E, doc = _model_from_args(args)
    hp0, hp1 = hp_crossed(E)
    m0, m1 = hp_manifold(E)
    return Report(
        "crossed-hp",
        {"model": doc},
        {"HP0": hp0, "HP1": hp1, "manifold_HP0": m0, "manifold_HP1": m1},
    )


def cmd_fourterm(args) -> Report:
    E, doc = _model_from_args(args)
    degrees = [args.degree] if args.degree is not None else list(range(E.complex.top + 3))
    rows = []
    for k in degrees:
        r = four_term(E, k)
        rows.append({"k": k, "coker_gamma": r.dims[0], "coker_beta": r.dims[1], "ker_gamma": r.dims[2], "ker_beta": r.dims[3], "exact": r.exact})
    ok = all(r["exact"] for r in rows)
    return Report("fourterm", {"model": doc, "degrees": degrees}, {"exact": ok}, rows, ok=ok)


def cmd_sixterm(args) -> Report:
    E, doc = _model_from_args(args)
    r = sixterm_consistency(E)
    return Report(
        "sixterm",
        {"model": doc},
        {
            "consistent": r.consistent,
            "hp_crossed": list(r.hp_crossed),
            "expected": list(r.expected),
            "ker_one_minus_alpha": list(r.ker),
            "coker_one_minus_alpha": list(r.coker),
            "cone": list(r.cone),
        },
        ok=r.consistent,
    )


def cmd_model(args) -> Report:
    E, doc = _model_from_args(args)
    return Report("model", {"model": doc}, {"complex": doc, "degrees": sorted(E.complex.dims)}, flags={"valid": True})


def cmd_bichar_nondeg(args) -> Report:
    doc, label = load_document(args.file)
    eta = parse_bicharacter(doc, label)
    v = nondegenerate(eta)
    result = {"verdict": "nondegenerate" if v else "degenerate", "witness": list(v.witness) if v.witness else None}
    return Report("bichar-nondeg", {"bicharacter": bicharacter_to_doc(eta)}, result)


def cmd_bichar_iso(args) -> Report:
    d1, l1 = load_document(args.file)
    d2, l2 = load_document(args.other)
    eta, eta2 = parse_bicharacter(d1, l1), parse_bicharacter(d2, l2)
    inputs = {"first": bicharacter_to_doc(eta), "second": bicharacter_to_doc(eta2)}
    if args.transform:
        T = _parse_transform(args.transform)
        inputs["transform"] = T
        return Report("bichar-iso", inputs, {"isomorphic_via_T": iso_check(eta, eta2, T), "transform": T})
    inputs["bound"] = args.bound
    T = iso_search(eta, eta2, args.bound)
    found = T is not None
    result = {
        "found": found,
        "transform": T.tolist() if found else None,
        "verdict": "isomorphic" if found else "not found within bound",
    }
    return Report("bichar-iso", inputs, result, flags={"bound": args.bound})


def cmd_seminorm(args) -> Report:
    doc, label = load_document(args.file)
    x = parse_element(doc, label)
    inputs = {"element": element_to_doc(x), "order": args.order}
    if isinstance(x, TrigPoly):
        v = trig_seminorm(x, args.order)
        result = {
            "kind": "trigonometric",
            "value": str(v),
            "coefficient": fmt_rational(v.coefficient),
            "two_pi_power": v.power,
            "approx": repr(float(v)),
        }
        flags = {"sup_norm_rule": "l1 bound on Fourier coefficients"}
    else:
        v = lattice_seminorm(x, args.order)
        result = {"kind": "lattice", "value": fmt_rational(v)}
        flags = {"lattice_norm": "l1"}
    return Report("seminorm", inputs, result, flags=flags)


def cmd_rho(args) -> Report:
    table, canon = _opnorm_table(args.table)
    v = rho(args.k, args.n, table)
    return Report("rho", {"k": args.k, "n": args.n, **canon}, {"value": fmt_rational(v)})


COMMANDS = {
    "hochschild": cmd_hochschild,
    "cyclic": cmd_cyclic,
    "hp": cmd_hp,
    "einf-algebra": cmd_einf_algebra,
    "crossed-einf": cmd_crossed_einf,
    "crossed-hp": cmd_crossed_hp,
    "fourterm": cmd_fourterm,
    "sixterm": cmd_sixterm,
    "model": cmd_model,
    "bichar-nondeg": cmd_bichar_nondeg,
    "bichar-iso": cmd_bichar_iso,
    "seminorm": cmd_seminorm,
    "rho": cmd_rho,
}


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hce", description="Exact Hochschild, cyclic and crossed-product invariants.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True, metavar="VERB")

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--format", choices=("text", "json"), default="text")
        return p

    def algebra(p):
        p.add_argument("--algebra", required=True, help="built-in name (C, C2, M2, dual), JSON file, or inline JSON")

    def model(p):
        p.add_argument("--model", choices=MODEL_NAMES)
        p.add_argument("--n", type=int, help="sphere parameter: the model of S^(2n+1)")
        p.add_argument("--complex", help="equivariant complex document (with alpha)")

    for verb, help_ in (("hochschild", "Hochschild cohomology dimensions"), ("cyclic", "cyclic cohomology dimensions")):
        p = add(verb, help_)
        algebra(p)
        p.add_argument("--max-degree", type=_nonneg, default=3)
        p.add_argument("--degree-cap", type=_nonneg)

    p = add("hp", "periodic cyclic cohomology from the (b, B) total complex")
    algebra(p)
    p.add_argument("--window", type=int, default=6)

    p = add("einf-algebra", "limit terms S(HC^n)/S(HC^(n-2))")
    algebra(p)
    p.add_argument("--window", type=int, default=6)
    p.add_argument("--max-degree", type=_nonneg)

    p = add("crossed-einf", "E_infinity table of a crossed product model")
    model(p)
    p.add_argument("--max-degree", type=_nonneg)

    for verb, help_ in (
        ("crossed-hp", "HP of the crossed product and of the manifold"),
        ("sixterm", "six-term dimension consistency"),
        ("model", "emit a built-in model as a complex document"),
    ):
        model(add(verb, help_))

    p = add("fourterm", "the four-term exact sequence")
    model(p)
    p.add_argument("--degree", type=_nonneg)

    p = add("bichar-nondeg", "decide nondegeneracy of a bicharacter")
    p.add_argument("--file", required=True)

    p = add("bichar-iso", "check or search for an isomorphism of bicharacters")
    p.add_argument("--file", required=True)
    p.add_argument("--other", required=True)
    p.add_argument("--transform", help="3x3 integer matrix as JSON or 'a,b,c;d,e,f;g,h,i'")
    p.add_argument("--bound", type=int, default=1)

    p = add("seminorm", "lattice or trigonometric seminorm of an element")
    p.add_argument("--file", required=True)
    p.add_argument("--order", type=_nonneg, required=True)

    p = add("rho", "the weight rho_k(n)")
    p.add_argument("--k", type=_nonneg, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--table", help="operator-norm table: list of [t, i, \"p/q\"]")
    return parser


def run_command(args: argparse.Namespace) -> Report:
    return COMMANDS[args.verb](args)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = run_command(args)
    except (InvariantError, ConstructionError) as exc:
        print(f"hce: invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ParseError, UsageError, DegreeCapError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"hce: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = render_json(report) if args.format == "json" else render_text(report)
    sys.stdout.write(out)
    return EXIT_OK if report.ok else EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
