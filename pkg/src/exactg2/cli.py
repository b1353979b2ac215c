"""Command-line front end.

Every subcommand builds a report tree ``{tool, version, command, inputs,
results}`` and renders it as JSON or indented text.  Exit codes: 0 when the
computation succeeds and the checked property holds, 2 when it was computed
but the property fails, 1 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .catalog import (catalog_entry, load_catalog, reference_fixtures, parse_structure_equations,
                      render_structure_equations)
from .classify import classify_nilpotent, sweep_catalog
from .derivations import derivation_space, is_derivation, is_nilpotent_matrix
from .exterior import basis_vector, format_form, parse_form
from .g2 import (exactness_obstruction, exact_primitive, g2_bilinear, g2_nondegenerate, is_closed,
                 metric_volume, standard_adapted_form)
from .lie import betti_numbers, central_series, cohomology, semidirect_extend, unimodularity
from .linalg import ExactMatrix, format_vector
from .ring import EMPTY, UsageError, format_scalar, parse_polynomial

EXIT_OK, EXIT_USAGE, EXIT_FAILS = 0, 1, 2

FIXTURE_KEYS = ("s-example", "h-example", "h-E")


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------


def resolve_algebra(args):
    """The algebra named by ``--tuple`` or ``--catalog-id`` plus its echoed canonical form."""
    if getattr(args, "tuple", None):
        g = parse_structure_equations(args.tuple, name="input")
        return g, {"tuple": render_structure_equations(g)}
    key = getattr(args, "catalog_id", None)
    if not key:
        raise UsageError("give an algebra with --tuple or --catalog-id")
    if key in FIXTURE_KEYS:
        fx = reference_fixtures()
        g = {"s-example": fx.s, "h-example": fx.h, "h-E": fx.h_E}[key]
        return g, {"catalog_id": key, "tuple": render_structure_equations(g)}
    e = catalog_entry(key)
    return e.algebra, {"catalog_id": str(e.id), "tuple": e.tuple_text, "provenance": e.provenance}


def parse_matrix(text: str, dim: int, registry=EMPTY) -> ExactMatrix:
    """Rows separated by ';', entries by ',' (e.g. ``1,0;0,2``)."""
    rows = []
    for line in text.split(";"):
        if line.strip():
            rows.append([parse_polynomial(x, registry) for x in line.split(",")])
    if len(rows) != dim or any(len(r) != dim for r in rows):
        raise UsageError(f"malformed matrix: expected {dim} rows of {dim} entries")
    return ExactMatrix(rows, registry)


def _ideal_arg(text, dim):
    if not text:
        return None
    a, sep, b = text.partition("..")
    if not sep:
        raise UsageError("ideal must read 'i..j'")
    lo, hi = int(a), int(b)
    if not 1 <= lo <= hi <= dim:
        raise UsageError(f"ideal {text} outside 1..{dim}")
    return list(range(lo, hi + 1))


def _phi(args, dim=7):
    return parse_form(args.phi, dim) if args.phi else standard_adapted_form()


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_betti(args):
    g, inputs = resolve_algebra(args)
    return inputs, {"betti": list(betti_numbers(g))}, EXIT_OK


def cmd_cohomology(args):
    g, inputs = resolve_algebra(args)
    if not 0 <= args.degree <= g.dim:
        raise UsageError(f"degree {args.degree} outside 0..{g.dim}")
    H = cohomology(g, args.degree)
    inputs["degree"] = args.degree
    return inputs, {"betti": H.betti, "representatives": [format_form(r) for r in H.representatives]}, EXIT_OK


def cmd_series(args):
    g, inputs = resolve_algebra(args)
    ideal = _ideal_arg(args.ideal, g.dim) or g.ideal or list(range(1, g.dim + 1))
    chain = central_series(g, ideal)
    terms = [[format_vector(v) for v in t] for t in chain.terms]
    return inputs, {"dims": chain.dims(), "terms": terms, "nilpotent": chain.nilpotent}, EXIT_OK


def cmd_unimodular(args):
    g, inputs = resolve_algebra(args)
    ideal = _ideal_arg(args.ideal, g.dim)
    if ideal is None and g.ideal is None:
        if not central_series(g).nilpotent:
            raise UsageError("pass --ideal with a nilpotent ideal for strong unimodularity")
        ideal = list(range(1, g.dim + 1))
    rep = unimodularity(g, ideal)
    w = None
    if rep.witness:
        x, i, tr = rep.witness
        w = {"X": f"e{x}", "quotient": i, "trace": format_scalar(tr)}
    res = {"unimodular": rep.unimodular, "strongly_unimodular": rep.strongly_unimodular,
           "witness": w, "series_dims": rep.series.dims()}
    return inputs, res, EXIT_OK if rep.strongly_unimodular else EXIT_FAILS


def cmd_derivations(args):
    g, inputs = resolve_algebra(args)
    space = derivation_space(g)
    return inputs, {"dimension": space.dimension, "parameters": space.parameters,
                    "generic": space.generic.to_strings()}, EXIT_OK


def _derivation(args, g):
    if args.derivation == "generic":
        return derivation_space(g).generic
    D = parse_matrix(args.derivation, g.dim)
    bad = is_derivation(g, D)
    if bad is not None:
        raise UsageError(f"not a derivation: Leibniz fails on (e{bad[0]}, e{bad[1]})")
    return D


def cmd_extend(args):
    g, inputs = resolve_algebra(args)
    D = _derivation(args, g)
    ext = semidirect_extend(g, D, check=False)
    inputs["derivation"] = D.to_strings()
    res = {"differentials": [format_form(f) if f else "0" for f in ext.differentials]}
    if ext.is_numeric():
        res["tuple"] = render_structure_equations(ext)
        res["betti"] = list(betti_numbers(ext))
        res["derivation_nilpotent"] = is_nilpotent_matrix(D)
        rep = unimodularity(ext)
        res["unimodular"] = rep.unimodular
        res["strongly_unimodular"] = rep.strongly_unimodular
    return inputs, res, EXIT_OK


def verdict_record(v):
    rec = {"id": v.algebra_id, "tuple": v.tuple_text,
           "su_constraints": v.su_constraints.describe(),
           "verdict": "admits" if v.admits else "excluded"}
    if v.admits:
        rec["sample_point"] = {k: format_scalar(x) for k, x in v.sample_point.items() if x}
    else:
        rec["failing_k"] = v.failing_k
        rec["failing_degrees"] = v.failing_degrees
    rec["degrees"] = [{"k": d.degree, "size": d.size, "vanishes_on_S": d.vanishes_on_S,
                       "certificate": d.certificate,
                       "det": None if d.det is None else str(d.det),
                       "det_on_S": None if d.det_on_S is None else str(d.det_on_S)}
                      for d in v.degrees]
    if v.expected_k is not None or v.admits:
        rec["matches_listed_exclusion"] = v.matches_expectation
    return rec


def cmd_classify(args):
    g, inputs = resolve_algebra(args)
    expected = None
    if args.catalog_id and args.catalog_id not in FIXTURE_KEYS:
        expected = catalog_entry(args.catalog_id).expected_exclusion
    v = classify_nilpotent(g, inputs.get("catalog_id", "input"), inputs["tuple"], expected)
    return inputs, verdict_record(v), EXIT_OK if v.admits else EXIT_FAILS


def cmd_sweep(args):
    verdicts = sweep_catalog(load_catalog())
    records = [verdict_record(v) for v in verdicts]
    admitting = [r["id"] for r in records if r["verdict"] == "admits"]
    summary = {"entries": len(records), "admitting": admitting,
               "excluded_by_minimal_k": {str(k): sum(1 for v in verdicts if v.failing_k == k)
                                         for k in (1, 2, 3)}}
    return {}, {"summary": summary, "records": records}, EXIT_OK


def cmd_g2_check(args):
    phi = _phi(args)
    inputs = {"phi": format_form(phi)}
    v = g2_nondegenerate(phi)
    data = g2_bilinear(phi)
    res = {"is_g2": v.is_g2, "sign": v.sign, "B": data.matrix.to_strings(),
           "det_B": format_scalar(data.det), "char_poly": str(v.char_poly)}
    if not v.is_g2:
        res["witness"] = format_vector(v.witness)
        res["witness_value"] = format_scalar(v.witness_value)
    else:
        mv = metric_volume(phi, args.precision)
        res["metric_exact"] = mv.exact
        res["volume_factor"] = mv.mu_string()
        res["metric"] = mv.metric_strings()
    if args.catalog_id or args.tuple:
        g, alg = resolve_algebra(args)
        inputs.update(alg)
        res["closed"] = is_closed(g, phi)
    return inputs, res, EXIT_OK if v.is_g2 else EXIT_FAILS


def cmd_g2_primitive(args):
    g, inputs = resolve_algebra(args)
    phi = parse_form(args.phi, g.dim) if args.phi else standard_adapted_form()
    inputs["phi"] = format_form(phi)
    r = exact_primitive(g, phi)
    if r.exact:
        return inputs, {"exact": True, "primitive": format_form(r.primitive)}, EXIT_OK
    return inputs, {"exact": False,
                    "class_coordinates": [format_scalar(x) for x in r.class_coordinates]}, EXIT_FAILS


def _vector(text):
    text = text.strip()
    if text.startswith("e") and text[1:].isdigit():
        return basis_vector(7, int(text[1:]))
    parts = [parse_polynomial(x, EMPTY).constant_value() for x in text.strip("()").split(",")]
    if len(parts) != 7:
        raise UsageError(f"vector {text!r} needs 7 entries")
    return parts


def cmd_g2_obstruct(args):
    e = catalog_entry(args.nilradical)
    n = e.algebra
    D = derivation_space(n).generic
    sol = None
    if args.constraints == "su":
        from .classify import su_constraints
        sol = su_constraints(n, D)
    prefer = [_vector(p) for p in args.prefer] if args.prefer else _recorded_witness(args.nilradical)
    extra = [_vector(x) for x in args.vector]
    cert = exactness_obstruction(n, D, sol, extra_vectors=extra, family=args.nilradical, prefer=prefer)
    inputs = {"nilradical": args.nilradical, "tuple": e.tuple_text, "constraints": args.constraints}
    return inputs, cert.to_dict(), EXIT_OK if cert.verdict else EXIT_FAILS


def _recorded_witness(alias):
    rec = reference_fixtures().obstruction.get(f"{alias}_witness")
    return [_vector(rec)] if rec else []


def cmd_reproduce(args):
    from .acceptance import run_acceptance

    only = [x for part in args.only for x in part.split(",")] if args.only else None
    results = run_acceptance(only)
    res = {"criteria": [r.to_dict() for r in results],
           "passed": sum(r.passed for r in results), "total": len(results)}
    return {"only": only}, res, EXIT_OK if all(r.passed for r in results) else EXIT_FAILS


# ---------------------------------------------------------------------------
# Parser and rendering
# ---------------------------------------------------------------------------


def _algebra_opts(p, required=True):
    grp = p.add_mutually_exclusive_group(required=required)
    grp.add_argument("--tuple", help="structure equations, e.g. '(0,0,0,0,e12,e34)'")
    grp.add_argument("--catalog-id", help="catalog id or alias (a, n1, n2, worked) or "
                                          "s-example, h-example, h-E")


def build_parser():
    p = argparse.ArgumentParser(prog="exactg2", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"exactg2 {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--timing", action="store_true", help="include wall-clock timing")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text, algebra=True):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        if algebra:
            _algebra_opts(sp)
        sp.set_defaults(func=fn)
        return sp

    add("betti", cmd_betti, "Betti numbers")
    add("cohomology", cmd_cohomology, "cohomology representatives").add_argument(
        "--degree", type=int, required=True)
    add("series", cmd_series, "descending central series of an ideal").add_argument(
        "--ideal", help="index range such as 1..6")
    add("unimodular", cmd_unimodular, "unimodularity and strong unimodularity").add_argument(
        "--ideal", help="designated nilpotent ideal such as 1..6")
    add("derivations", cmd_derivations, "derivation space and generic derivation")
    add("extend", cmd_extend, "semidirect extension by a derivation").add_argument(
        "--derivation", default="generic", help="'generic' or rows like '1,0;0,2'")
    add("classify", cmd_classify, "(2,3)-triviality verdict for a nilpotent algebra")
    add("sweep", cmd_sweep, "classify every catalog entry", algebra=False)
    sp = add("g2-check", cmd_g2_check, "nondegeneracy, metric and volume of a 3-form", algebra=False)
    _algebra_opts(sp, required=False)
    sp.add_argument("--phi", help="3-form, default the adapted form")
    sp.add_argument("--precision", type=int, default=50, help="digits for inexact volumes")
    add("g2-primitive", cmd_g2_primitive, "primitive of a closed 3-form").add_argument(
        "--phi", help="3-form, default the adapted form")
    sp = add("g2-obstruct", cmd_g2_obstruct, "exactness obstruction certificate", algebra=False)
    sp.add_argument("--nilradical", required=True, help="catalog id or alias of the base algebra")
    sp.add_argument("--constraints", choices=("none", "su"), default="none")
    sp.add_argument("--prefer", action="append", default=[], help="preferred witness, e.g. e6")
    sp.add_argument("--vector", action="append", default=[], help="extra candidate vector")
    sp = add("reproduce", cmd_reproduce, "run the acceptance criteria", algebra=False)
    sp.add_argument("--only", action="append", default=[],
                    help="criterion numbers, tags or groups (comma separated)")
    return p


def render_text(node, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(node, dict):
        for k, v in node.items():
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}{k}:")
                lines.extend(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_inline(v)}")
    elif isinstance(node, list):
        for v in node:
            if isinstance(v, (dict, list)) and v and not _flat(v):
                lines.append(f"{pad}-")
                lines.extend(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {_inline(v)}")
    else:
        lines.append(pad + _inline(node))
    return lines


def _flat(v):
    return isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v)


def _inline(v):
    if isinstance(v, list):
        return "[" + ", ".join(_inline(x) for x in v) + "]"
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "-"
    return str(v)


def _reproduce_text(report):
    lines = [f"exactg2 {report['version']} reproduce"]
    res = report["results"]
    for c in res["criteria"]:
        lines.append(f"[{'PASS' if c['passed'] else 'FAIL'}] {c['number']:2d} {c['tag']}: {c['title']}")
    lines.append(f"{res['passed']}/{res['total']} criteria pass")
    return lines


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    start = time.perf_counter()
    try:
        inputs, results, code = args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {"tool": "exactg2", "version": __version__, "command": args.command,
              "inputs": inputs, "results": results}
    if args.timing:
        report["timing_seconds"] = round(time.perf_counter() - start, 3)
    if args.format == "json":
        print(json.dumps(report, indent=2))
    elif args.command == "reproduce":
        print("\n".join(_reproduce_text(report)))
    else:
        print("\n".join(render_text(report)))
    return code


if __name__ == "__main__":
    sys.exit(main())
