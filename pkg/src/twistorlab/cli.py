"""Command-line front end.

Exit codes: 0 success or affirmative verdict, 1 negative verdict, 2 usage or
data error, 3 numerical failure (convergence, degeneracy, domain).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import zlib
from pathlib import Path

import numpy as np

from . import acceptance, catalog
from .charts import Chart, ChartFormatError, DegenerateError, load_chart, sample_box
from .chern import (
    ConvergenceError,
    RingContext,
    RingError,
    deformation_obstructed,
    first_chern,
    gauss_bonnet,
    integrate,
    total_chern,
)
from .curvature import CurvatureBlocks, curvature_operator, invariants, lck_split
from .expr import ExprSyntaxError
from .jets import DomainError
from .nijenhuis import NijenhuisError, assembled_nijenhuis, classify_theorem2, full_check, verify_semi_integrable
from .oracle import bruteforce_nijenhuis
from .twistor import MorphismError, parse_morphism, sample_points, vertical_basis

SCHEMA = "twistorlab/1"
EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
ORACLE_TOL = 1e-5


class UsageError(ValueError):
    pass


# --- helpers ---------------------------------------------------------------------


def _resolve_chart(source: str) -> Chart:
    if source in catalog.names():
        return catalog.get(source).chart
    path = Path(source)
    if path.exists():
        return load_chart(path)
    raise UsageError(f"{source!r} is neither a catalog entry ({', '.join(catalog.names())}) nor a chart file")


def _floats(text: str, count: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise UsageError(f"expected {count} numbers, got {len(vals)} in {text!r}")
    return vals


def _grid_points(chart: Chart, n: int) -> np.ndarray:
    if n < 1:
        raise UsageError("--grid needs a positive integer")
    lo, hi = sample_box(chart, margin=0.1, infinite_extent=1.0)
    axes = [lo[k] + (np.arange(n) + 0.5) * (hi[k] - lo[k]) / n for k in range(4)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _points(chart: Chart, args) -> np.ndarray:
    if args.at:
        return np.array([_floats(a, 4) for a in args.at])
    return _grid_points(chart, args.grid if args.grid else 1)


def _sample_seed(chart: Chart, morphism: str, seed: int) -> int:
    return zlib.crc32(f"{chart.name}|{morphism}|{seed}".encode())


def _samples(chart: Chart, morphism: str, args):
    total = args.samples
    if total < 1:
        raise UsageError("--samples must be positive")
    base = math.ceil(total / 4)
    return sample_points(chart, base, 4, _sample_seed(chart, morphism, args.seed))[:total]


def _r(v, digits: int = 12):
    """Round floats (and nested containers) for stable output."""
    if isinstance(v, dict):
        return {k: _r(x, digits) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_r(x, digits) for x in v]
    if isinstance(v, np.ndarray):
        return _r(v.tolist(), digits)
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.{digits}g}") + 0.0
    return v


def _matrix_text(m) -> str:
    return "\n".join("    " + "  ".join(f"{v:12.6g}" for v in row) for row in np.asarray(m))


# --- commands --------------------------------------------------------------------
# Each command returns (exit code, machine document, text lines).


def cmd_curvature(args):
    chart = _resolve_chart(args.chart)
    pts = _points(chart, args)
    has_section = chart.kahler_section is not None
    rows, lines = [], []
    for x in pts:
        blocks = curvature_operator(chart, x)
        inv = invariants(blocks)
        row = {"x": list(x), "A": blocks.A, "B": blocks.B, "C": blocks.C, "s": inv.s,
               "Wplus_eigenvalues": inv.Wplus_eigs, "normWplus2": inv.normWplus2, "normB2": inv.normB2,
               "einstein_residual": inv.einstein_residual}
        lines.append(f"x = ({', '.join(f'{v:.6g}' for v in x)})")
        lines.append(f"  s = {inv.s:.10g}   |W+|^2 = {inv.normWplus2:.6g}   |B|^2 = {inv.normB2:.6g}")
        lines.append("  A =")
        lines.append(_matrix_text(blocks.A))
        lines.append("  B =")
        lines.append(_matrix_text(blocks.B))
        if has_section:
            xv, yv, ok = lck_split(chart, x, blocks=blocks)
            verdict = classify_theorem2(xv, yv, tol=1e-7, adapted=ok)
            row.update(x_value=xv, y_value=yv, adapted=ok, case=verdict.case)
            lines.append(f"  adapted split x = {xv:.10g}, y = {yv:.10g}: case {verdict.case}")
        rows.append(row)
    return EXIT_OK, {"chart": chart.name, "points": _r(rows)}, lines


def _report_doc(chart, spec, rep):
    witness = None
    if rep.failing_witness is not None:
        pair, comp = rep.failing_witness
        witness = {"pair": None if pair is None else list(pair), "component": comp, "sample": rep.witness_sample}
    return {
        "chart": chart.name, "morphism": spec, "samples": int(len(rep.defect)), "tol": _r(rep.tol),
        "integrable": rep.integrable, "semi_integrable": rep.semi_integrable,
        "max": _r({"E": rep.maxE, "F": rep.maxF, "horizontal": rep.maxH, "G": rep.maxG, "defect": rep.max_defect}),
        "witness": witness,
    }


def cmd_check(args):
    chart = _resolve_chart(args.chart)
    f = parse_morphism(args.morphism)
    rep = full_check(chart, f, _samples(chart, args.morphism, args), tol=args.tol)
    doc = _report_doc(chart, args.morphism, rep)
    verdict = "integrable" if rep.integrable else "not integrable"
    lines = [f"{chart.name} with {args.morphism}: {verdict} over {doc['samples']} samples (tol {rep.tol:.3g})",
             f"  max |E| {rep.maxE:.3e}  |F| {rep.maxF:.3e}  |E+F| {rep.maxH:.3e}  |G| {rep.maxG:.3e}  "
             f"defect {rep.max_defect:.3e}"]
    if doc["witness"]:
        w = doc["witness"]
        where = "" if w["pair"] is None else f" on pair ({w['pair'][0]}, {w['pair'][1]})"
        lines.append(f"  witness: {w['component']}{where} at sample {w['sample']}")
    return (EXIT_OK if rep.integrable else EXIT_NEGATIVE), doc, lines


def _parse_blocks(text: str) -> tuple[float, float]:
    vals = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        if not sep or key.strip() not in ("x", "y"):
            raise UsageError(f"--blocks expects x=..,y=.., got {text!r}")
        try:
            vals[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"--blocks value {val!r} is not a number") from None
    if set(vals) != {"x", "y"}:
        raise UsageError("--blocks needs both x and y")
    return vals["x"], vals["y"]


def _verdict_doc(v, residual):
    return {"case": v.case, "x": _r(v.x), "y": _r(v.y), "ratio": _r(v.ratio), "theta": _r(v.theta),
            "morphisms": list(v.morphisms), "factors": [[_r(z.real), _r(z.imag)] for z in v.factors],
            "residual": _r(residual)}


def cmd_classify(args):
    tol = 1e-7 if args.tol is None else args.tol
    if args.blocks:
        xv, yv = _parse_blocks(args.blocks)
        v = classify_theorem2(xv, yv, tol=tol)
        residual = verify_semi_integrable(CurvatureBlocks.from_blocks(np.diag([xv, yv, yv])), v) if v.case != "NotLck" else None
        doc = {"mode": "blocks", "verdict": _verdict_doc(v, residual)}
        lines = [f"x = {xv:g}, y = {yv:g}: case {v.case}"]
        if v.theta is not None:
            lines.append(f"  theta = {v.theta:.12g}")
        if v.factors:
            lines.append("  semi-integrable: " + ", ".join(f"{z.real:.12g}{z.imag:+.12g}i" for z in v.factors))
        lines.append(f"  residual {residual:.3e}")
        return EXIT_OK, doc, lines
    if not args.chart:
        raise UsageError("classify needs a chart or --blocks")
    chart = _resolve_chart(args.chart)
    if chart.kahler_section is None:
        raise UsageError(f"chart {chart.name} carries no kahler_section to classify against")
    rows, cases, lines = [], {}, []
    for x in _points(chart, args):
        blocks = curvature_operator(chart, x)
        xv, yv, ok = lck_split(chart, x, blocks=blocks, tol=args.tol)
        v = classify_theorem2(xv, yv, tol=tol, adapted=ok)
        residual = verify_semi_integrable(blocks, v) if v.case != "NotLck" else None
        rows.append({"x": _r(list(x)), **_verdict_doc(v, residual)})
        cases[v.case] = cases.get(v.case, 0) + 1
        lines.append(f"x = ({', '.join(f'{c:.4g}' for c in x)}): case {v.case} (x = {xv:.6g}, y = {yv:.6g})")
    lines.append("summary: " + ", ".join(f"case {k} x{n}" for k, n in sorted(cases.items())))
    return EXIT_OK, {"mode": "chart", "chart": chart.name, "points": rows, "summary": cases}, lines


def cmd_oracle(args):
    chart = _resolve_chart(args.chart)
    f = parse_morphism(args.morphism)
    rng = np.random.default_rng(_sample_seed(chart, args.morphism, args.seed))
    tol = ORACLE_TOL if args.tol is None else args.tol
    rows, worst = [], 0.0
    for pt in _samples(chart, args.morphism, args):
        x, q = np.array(pt.x), pt.q.array
        X1, X2 = vertical_basis(q)
        V = (rng.normal(size=4), rng.normal() * X1 + rng.normal() * X2)
        W = (rng.normal(size=4), rng.normal() * X1 + rng.normal() * X2)
        hb, vb = bruteforce_nijenhuis(chart, f, x, q, V, W)
        ha, va = assembled_nijenhuis(chart, f, x, q, V, W)
        dh, dv = float(np.max(np.abs(hb - ha))), float(np.max(np.abs(vb - va)))
        worst = max(worst, dh, dv)
        rows.append({"x": _r(list(x)), "q": _r(list(q)), "horizontal": _r(dh, 4), "vertical": _r(dv, 4)})
    ok = worst <= tol
    doc = {"chart": chart.name, "morphism": args.morphism, "tol": tol, "max_deviation": _r(worst, 4),
           "agree": ok, "deviations": rows}
    lines = [f"{chart.name} with {args.morphism}: max deviation {worst:.3e} over {len(rows)} samples "
             f"({'agree' if ok else 'DISAGREE'} at tol {tol:g})"]
    return (EXIT_OK if ok else EXIT_NEGATIVE), doc, lines


def cmd_chern(args):
    ctx = RingContext(args.tau, args.chi, 2 * args.chi + 3 * args.tau if args.c1sq is None else args.c1sq)
    obs = deformation_obstructed(ctx)
    cid, cinf = total_chern("J_Id", ctx), total_chern("J_inf", ctx)
    k = 3 * args.tau + 2 * args.chi
    doc = {"tau": args.tau, "chi": args.chi, "c1sq": ctx.c1sq, "three_tau_plus_two_chi": k,
           "c_J_Id": cid.text(), "c_J_inf": cinf.text(),
           "c1_cubed_J_Id": str(integrate(first_chern("J_Id", ctx) ** 3)),
           "c1_cubed_J_inf": str(integrate(first_chern("J_inf", ctx) ** 3)),
           "obstruction": obs.distinct_chern_numbers, "detail": obs.detail}
    lines = [f"tau = {args.tau}, chi = {args.chi}, 3 tau + 2 chi = {k}",
             f"  c(J_Id)  = {doc['c_J_Id']}", f"  c(J_inf) = {doc['c_J_inf']}",
             f"  c1(J_Id)^3 = {doc['c1_cubed_J_Id']}, c1(J_inf)^3 = {doc['c1_cubed_J_inf']}",
             f"  obstruction: {str(obs.distinct_chern_numbers).lower()} ({obs.detail})"]
    return EXIT_OK, doc, lines


def cmd_gauss_bonnet(args):
    chart = _resolve_chart(args.chart)
    res = gauss_bonnet(chart, resolution=args.resolution, tol=args.tol)
    doc = {"chart": chart.name, "value": _r(res.value, 10), "coarse": _r(res.coarse, 10), "gap": _r(res.gap, 4),
           "tol": _r(res.tol, 4), "converged": res.converged, "points": res.points}
    tau, chi = chart.label("tau"), chart.label("chi")
    lines = [f"{chart.name}: 3 tau + 2 chi = {res.value:.8f} (coarse {res.coarse:.8f}, gap {res.gap:.2e}, "
             f"tol {res.tol:.2e})"]
    if tau is not None and chi is not None:
        expected = 3 * int(tau) + 2 * int(chi)
        doc["expected"] = expected
        lines.append(f"  catalog labels tau = {tau}, chi = {chi} give {expected}")
    return EXIT_OK, doc, lines


def cmd_verify_all(args):
    results = acceptance.run_all(args.seed)
    ok = all(r.passed for r in results)
    doc = {"seed": args.seed, "passed": ok, "criteria": [r.as_dict() for r in results]}
    lines = [r.line() for r in results]
    lines.append(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return (EXIT_OK if ok else EXIT_NEGATIVE), doc, lines


def cmd_catalog(args):
    if args.action == "list":
        rows = [{"name": e.name, "description": e.description, "labels": e.labels} for e in catalog.entries()]
        lines = [f"{e.name:16s} {e.description}" for e in catalog.entries()]
        return EXIT_OK, {"entries": rows}, lines
    if not args.name:
        raise UsageError("catalog export needs an entry name")
    try:
        text = catalog.export(args.name)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    return EXIT_OK, {"name": args.name, "chart": text}, text.rstrip("\n").split("\n")


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "machine"), default="text")
    common.add_argument("--out", help="write the output to this file instead of stdout")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None)

    points = argparse.ArgumentParser(add_help=False)
    points.add_argument("--at", action="append", help="x1,x2,x3,x4 (repeatable)")
    points.add_argument("--grid", type=int, help="points per axis of a grid over the sampling box")

    sampled = argparse.ArgumentParser(add_help=False)
    sampled.add_argument("--samples", type=int, default=64)
    sampled.add_argument("--morphism", default="id")

    p = argparse.ArgumentParser(prog="twistorlab", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("curvature", parents=[common, points], help="curvature blocks and invariants")
    s.add_argument("chart")
    s.set_defaults(func=cmd_curvature)

    s = sub.add_parser("check", parents=[common, sampled], help="Nijenhuis tensor of a compatible structure")
    s.add_argument("chart")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("classify", parents=[common, points], help="classification by the eigenvalue pair of A")
    s.add_argument("chart", nargs="?")
    s.add_argument("--blocks", help="synthetic mode: x=..,y=..")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("oracle", parents=[common, sampled], help="assembled tensor against brute-force brackets")
    s.add_argument("chart")
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("chern", parents=[common], help="Chern classes and the deformation obstruction")
    s.add_argument("--tau", type=int, required=True)
    s.add_argument("--chi", type=int, required=True)
    s.add_argument("--c1sq", type=int, default=None)
    s.set_defaults(func=cmd_chern)

    s = sub.add_parser("gauss-bonnet", parents=[common], help="(1/4 pi^2) times the integral of the curvature integrand")
    s.add_argument("chart")
    s.add_argument("--resolution", type=int, default=None)
    s.set_defaults(func=cmd_gauss_bonnet)

    s = sub.add_parser("verify-all", parents=[common], help="run every acceptance criterion")
    s.set_defaults(func=cmd_verify_all)

    s = sub.add_parser("catalog", parents=[common], help="list or export catalog charts")
    s.add_argument("action", choices=("list", "export"))
    s.add_argument("name", nargs="?")
    s.set_defaults(func=cmd_catalog)
    return p


def _emit(args, text: str):
    if getattr(args, "out", None):
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        code, doc, lines = args.func(args)
    except (DomainError, DegenerateError, ConvergenceError) as exc:
        code, doc, lines = EXIT_NUMERICAL, {"error": str(exc), "kind": "numerical"}, [f"error: {exc}"]
    except (UsageError, ChartFormatError, ExprSyntaxError, MorphismError, RingError, NijenhuisError,
            KeyError, OSError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        code, doc, lines = EXIT_USAGE, {"error": msg, "kind": "usage"}, [f"error: {msg}"]
    if args.format == "machine":
        payload = {"schema": SCHEMA, "command": args.command, "exit_code": code, "result": doc}
        _emit(args, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    else:
        text = "\n".join(lines) + "\n"
        if code in (EXIT_USAGE, EXIT_NUMERICAL) and args.format == "text" and not getattr(args, "out", None):
            sys.stderr.write(text)
        else:
            _emit(args, text)
    return code


if __name__ == "__main__":
    sys.exit(main())
