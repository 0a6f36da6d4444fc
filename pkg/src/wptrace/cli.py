"""Command-line front end.  Outputs are CSV or JSON only.

Exit status: 0 when every check passed, 1 on a verification failure,
2 on a usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import List

import numpy as np

from . import __version__, diagram, fexpr, frfun, geolen, graphlab, kernels, pipoly, volfun

OK, FAIL, USAGE = 0, 1, 2

CATALOG_BY_R = {1: "figure-eight", 2: "chain-2", 3: "three-bar", 4: "chain-4"}


class InputError(Exception):
    pass


# -- parsing helpers --------------------------------------------------------------

def parse_range(text: str) -> np.ndarray:
    """``a..b:step`` (inclusive), ``a..b`` (unit step), ``v1,v2,...`` or a single value."""
    text = text.strip()
    try:
        if ".." in text:
            span, _, step = text.partition(":")
            a, b = (float(t) for t in span.split(".."))
            step = float(step) if step else 1.0
            if not step > 0 or b < a:
                raise ValueError
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            # rounding to 12 digits keeps outputs free of accumulated float noise
            return np.round(a + step * np.arange(n), 12)
        return np.array([float(t) for t in text.split(",") if t.strip()])
    except ValueError:
        raise InputError(f"bad range {text!r}; expected a..b:step or a comma list") from None


def parse_grid(text: str):
    """Grid ``0..lmax:h`` for FR functions."""
    span, _, step = text.partition(":")
    try:
        a, b = (float(t) for t in span.split(".."))
        h = float(step)
    except ValueError:
        raise InputError(f"bad grid {text!r}; expected 0..lmax:h") from None
    if a != 0:
        raise InputError("FR grids start at 0")
    return h, b


def _table(args):
    if args.table is None:
        return pipoly.bundled_table()
    path = Path(args.table)
    if not path.is_file():
        raise InputError(f"table file not found: {path}")
    return pipoly.read_table(path)


def _diagram(args):
    if getattr(args, "diagram_file", None):
        path = Path(args.diagram_file)
        if not path.is_file():
            raise InputError(f"diagram file not found: {path}")
        return diagram.read(path)
    if getattr(args, "diagram", None):
        return diagram.catalog(args.diagram)
    r = getattr(args, "r", None)
    if r is None:
        return diagram.catalog("figure-eight")
    if r not in CATALOG_BY_R:
        raise InputError(f"no bundled diagram with r = {r}; choose from {sorted(CATALOG_BY_R)}")
    return diagram.catalog(CATALOG_BY_R[r])


def _graph(args):
    if args.graph_file:
        path = Path(args.graph_file)
        if not path.is_file():
            raise InputError(f"graph file not found: {path}")
        return graphlab.Graph.from_edgelist(path.read_text())
    if args.n is None or args.d is None:
        raise InputError("give --graph-file or both --n and --d")
    return graphlab.random_regular(args.n, args.d, args.seed)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Fraction):
        return str(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _csv(header: List[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _table_out(args, header, rows, meta=None):
    """Rows as CSV, or as JSON records (with optional metadata) under --format json."""
    if args.format == "json":
        recs = [dict(zip(header, [float(v) if isinstance(v, np.floating) else v for v in r])) for r in rows]
        doc = {"rows": recs}
        if meta:
            doc.update(meta)
        _emit(args, _json(doc))
    else:
        _emit(args, _csv(header, rows))


def _report(args, record: dict, passed: bool) -> int:
    record = dict(record, passes=bool(passed))
    if args.format == "csv":
        flat = {k: v for k, v in record.items() if not isinstance(v, (dict, list))}
        _emit(args, _csv(list(flat), [list(flat.values())]))
    else:
        _emit(args, _json(record))
    return OK if passed else FAIL


# -- commands ---------------------------------------------------------------------

def cmd_volumes(args):
    table = _table(args)
    entries = []
    for (g, n) in sorted(table.entries):
        p = table.entries[(g, n)]
        entries.append({"g": g, "n": n, "degree": p.degree(), "terms": len(p.terms),
                        "source": table.provenance.get((g, n), ""),
                        "value_at_zero": float(p(*([0.0] * n)))})
    totals = {}
    for g in range(2, 8):
        try:
            totals[str(g)] = str(pipoly.total_volume(table, g))
        except (KeyError, ValueError, LookupError):
            continue
    if args.dump:
        _emit(args, pipoly.dump_table(table))
        return OK
    return _report(args, {"entries": entries, "closed_surface_volumes": totals}, True)


def cmd_vsimple(args):
    table = _table(args)
    ells = parse_range(args.ell)
    vals = volfun.v_simple(table, args.g, ells)
    rows = [(float(l), float(v), 0.0, args.g, "simple") for l, v in zip(ells, np.atleast_1d(vals))]
    _table_out(args, ["ell", "value", "err_estimate", "g", "type"], rows)
    return OK


def cmd_vtype(args):
    table = _table(args)
    ells = parse_range(args.ell)
    tol = args.tol if args.tol is not None else 1e-8
    rows = []
    for l in ells:
        r = volfun.v_pop_type(table, args.g, float(l), n_T=args.n_T, tol=tol, form=args.form)
        rows.append((float(l), r.value, r.err, args.g, "figure_eight"))
    _table_out(args, ["ell", "value", "err_estimate", "g", "type"], rows)
    return OK


def cmd_length_check(args):
    d = _diagram(args)
    tol = args.tol if args.tol is not None else 1e-9
    rec = geolen.oracle_report(d, args.samples, args.seed)
    rec.update(r=d.r, tol=tol, backend=kernels.BACKEND)
    return _report(args, rec, rec["max_rel_err"] <= tol)


def cmd_jacobian_check(args):
    tol = args.tol if args.tol is not None else 1e-6
    rng = np.random.default_rng(args.seed)
    xs = rng.uniform(0.5, 6.0, size=(args.samples, 3))
    errs = [geolen.jacobian_fd_check_r1(*map(float, x), step=args.step)["rel_err"] for x in xs]
    rec = {"samples": args.samples, "seed": args.seed, "step": args.step,
           "max_rel_err": float(max(errs)), "tol": tol}
    return _report(args, rec, rec["max_rel_err"] <= tol)


def cmd_density_check(args):
    tol = args.tol if args.tol is not None else 1e-6
    d = diagram.catalog("figure-eight")
    rec = geolen.density_check_r1(d, args.samples, args.seed)
    rec["tol"] = tol
    ok = rec["rel_spread"] <= tol and rec["power_of_two_rel_err"] <= tol
    return _report(args, rec, ok)


def _fr(args, text, K=None):
    h, lmax = parse_grid(args.grid)
    return frfun.FRFunction.from_expr(text, h=h, lmax=lmax, K=K, N=args.N)


def _fr_rows(args, f):
    ells = parse_range(args.sample) if args.sample else np.arange(0.0, f.lmax + 0.5, 1.0)
    if np.any(ells < 0) or np.any(ells > f.lmax + 1e-12):
        raise InputError(f"sample points must lie in [0, {f.lmax}]")
    vals = np.atleast_1d(f(ells))
    meta = {"exact": repr(f.exact), "principal": [float(c) for c in f.principal], "K": f.K, "N": f.N}
    _table_out(args, ["ell", "value"], [(float(l), float(v)) for l, v in zip(ells, vals)], meta)
    return OK


def cmd_fr_apply(args):
    return _fr_rows(args, frfun.apply_op(_fr(args, args.expr), args.ops))


def cmd_fr_convolve(args):
    return _fr_rows(args, frfun.convolve(_fr(args, args.expr), _fr(args, args.expr2)))


def cmd_fr_norm(args):
    f = _fr(args, args.expr, K=args.K)
    rec = {"expr": args.expr, "K": args.K, "N": args.N, "grid": args.grid,
           "fr_norm": frfun.fr_norm(f, args.K, args.N),
           "weak_fr_norm": frfun.weak_fr_norm(f, args.K, args.N)}
    ok = rec["weak_fr_norm"] <= 2 * rec["fr_norm"] * (1 + 1e-6) if args.N >= 1 else True
    return _report(args, rec, ok)


def cmd_fr_charfr(args):
    f = _fr(args, args.expr)
    tol = args.tol if args.tol is not None else 0.01
    rec = frfun.check_charFR(f, args.K, args.N, lo=args.lo, tol=tol)
    rec["expr"] = args.expr
    return _report(args, rec, rec["passes"])


def cmd_fr_pseudo(args):
    n = args.n
    h = fexpr.numeric(args.level, n)
    phi = fexpr.numeric(args.phi, n)
    exprs = args.f or ["exp(x)"]
    if len(exprs) == 1:
        exprs = exprs * n
    if len(exprs) != n:
        raise InputError(f"give one --f or exactly {n}")
    fs = [fexpr.numeric(t, 1) for t in exprs]
    fs = [(lambda g: (lambda t: float(g(np.array([t])))))(g) for g in fs]
    spec = frfun.PseudoConvSpec(n, h, phi, a=args.a)
    ells = parse_range(args.ell)
    vals = frfun.pseudo_convolve(fs, spec, ells)
    _table_out(args, ["ell", "value"], [(float(l), float(v)) for l, v in zip(ells, vals)])
    return OK


def cmd_fr_class_e(args):
    fun = fexpr.numeric(args.phi, args.n)
    kw = dict(bound=args.bound, width=args.width, points=args.points)
    if args.level_set:
        rec = frfun.class_calE_check(fun, args.n, args.a, **kw)
    else:
        rec = frfun.class_E_check(fun, args.n, args.a, **kw)
    rec["expr"] = args.phi
    return _report(args, rec, rec["passes"])


def cmd_graph_spectrum(args):
    G = _graph(args)
    sp = graphlab.spectrum(G)
    rec = {"n": G.n, "m": G.m, "seed": args.seed, **sp.to_json_dict(),
           "bipartite": graphlab.is_bipartite(G), "connected": graphlab.is_connected(G)}
    if args.dump_graph:
        Path(args.dump_graph).write_text(G.to_edgelist())
    return _report(args, rec, True)


def _walk_rows(args, counts_fn, oracle_nb):
    G = _graph(args)
    counts = counts_fn(G, args.lmax)
    ok = True
    rows = []
    for ell in range(1, args.lmax + 1):
        row = [ell, counts[ell]]
        if args.verify:
            ref = graphlab.enumerate_closed_walks(G, ell, non_backtracking=oracle_nb)
            ok = ok and ref == counts[ell]
            row.append(ref)
        rows.append(row)
    header = ["ell", "count"] + (["oracle"] if args.verify else [])
    _table_out(args, header, rows, {"n": G.n, "m": G.m, "seed": args.seed})
    return OK if ok else FAIL


def cmd_graph_walks(args):
    return _walk_rows(args, graphlab.closed_walk_counts, False)


def cmd_graph_irreducible(args):
    return _walk_rows(args, graphlab.irreducible_loop_counts, True)


def cmd_graph_bound(args):
    children = np.random.SeedSequence(args.seed).spawn(args.trials)
    held, bip, worst = 0, 0, math.inf
    failures = []
    for i, c in enumerate(children):
        G = graphlab.random_regular(args.n, args.d, np.random.default_rng(c))
        ok = True
        for ell in range(1, args.lmax + 1):
            rep = graphlab.spectral_bound_check(G, ell)
            worst = min(worst, rep["slack"])
            if not rep["holds"]:
                ok = False
                failures.append({"trial": i, "ell": ell, "lhs": rep["lhs"], "rhs": rep["rhs"]})
        bip += rep["bipartite"]
        held += ok
    rec = {"n": args.n, "d": args.d, "lmax": args.lmax, "trials": args.trials, "seed": args.seed,
           "trials_held": held, "bipartite_trials": bip, "min_slack": worst, "failures": failures}
    return _report(args, rec, held == args.trials)


def cmd_graph_mc(args):
    res = graphlab.mc_expected_irreducible(args.n, args.d, args.lmax, args.trials, args.seed,
                                           jobs=args.jobs)
    if args.format == "json":
        rows = [{"ell": int(l), "mean_count": float(m), "stderr": float(s)}
                for l, m, s in zip(res.ells, res.mean, res.stderr)]
        _emit(args, _json({"n": res.n, "d": res.d, "trials": res.trials, "seed": res.seed,
                           "rows": rows}))
    else:
        _emit(args, res.to_csv())
    return OK


def _read_mc_csv(path):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"input file not found: {p}")
    with p.open() as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "mean_count" not in rows[0]:
        raise InputError("input must be a CSV with columns ell, mean_count, ...")
    counts = {int(r["ell"]): float(r["mean_count"]) for r in rows}
    se = {int(r["ell"]): float(r["stderr"]) for r in rows} if "stderr" in rows[0] else None
    return counts, se, int(rows[0]["d"])


def cmd_graph_fit(args):
    if args.input:
        counts, se, d = _read_mc_csv(args.input)
    else:
        if args.n is None or args.d is None:
            raise InputError("give --input or both --n and --d")
        res = graphlab.mc_expected_irreducible(args.n, args.d, args.lmax, args.trials,
                                               args.seed, jobs=args.jobs)
        counts = {int(l): float(m) for l, m in zip(res.ells, res.mean)}
        se = {int(l): float(s) for l, s in zip(res.ells, res.stderr)}
        d = args.d
    lo = args.lo
    counts = {l: v for l, v in counts.items() if l >= lo}
    if se is not None and not all(np.isfinite(list(se.values()))):
        se = None
    tol = args.tol if args.tol is not None else 0.05
    rec = graphlab.ramanujan_residual(counts, d, args.degree, tol=tol, stderr=se)
    ells = sorted(counts)
    rec["log_slope"] = graphlab.log_slope(ells, [counts[l] for l in ells], lo, max(ells))
    rec["log_slope_ratio"] = rec["log_slope"] / math.log(d - 1) if d > 2 else None
    return _report(args, rec, True)


# -- parser --------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--table", help="volume table JSON (default: bundled table)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--grid", default="0..40:0.001", help="FR grid 0..lmax:h")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=["csv", "json"], default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = argparse.ArgumentParser(prog="wptrace", description="Trace-method numerics.")
    top.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = top.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(parent, name, fn, fmt, help_):
        p = parent.add_parser(name, parents=[common], help=help_, description=help_)
        p.set_defaults(fn=fn, default_format=fmt, parser=p)
        return p

    p = add(sub, "volumes", cmd_volumes, "json", "validate and summarize a volume table")
    p.add_argument("--dump", action="store_true", help="print the table in canonical form")

    p = add(sub, "vsimple", cmd_vsimple, "csv", "volume function of simple non-separating loops")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--ell", required=True, help="a..b:step")

    p = add(sub, "vtype", cmd_vtype, "csv", "volume function of the figure-eight type")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--ell", required=True)
    p.add_argument("--n-T", dest="n_T", type=int, default=1)
    p.add_argument("--form", choices=["primary", "alternate"], default="primary")

    for name, fn, help_ in (("length-check", cmd_length_check, "expansion vs trace length oracle"),):
        p = add(sub, name, fn, "json", help_)
        g = p.add_mutually_exclusive_group()
        g.add_argument("--r", type=int)
        g.add_argument("--diagram", choices=sorted(diagram.CATALOG))
        g.add_argument("--diagram-file")
        p.add_argument("--samples", type=int, default=500)

    p = add(sub, "jacobian-check", cmd_jacobian_check, "json", "x3 -> L Jacobian vs finite differences")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--step", type=float, default=1e-4)

    p = add(sub, "density-check", cmd_density_check, "json", "density ratio on the figure-eight chart")
    p.add_argument("--samples", type=int, default=100)

    fr = sub.add_parser("fr", help="Friedman-Ramanujan functions").add_subparsers(
        dest="fr_command", required=True, metavar="ACTION")
    p = add(fr, "apply-op", cmd_fr_apply, "csv", "apply a word in P and L")
    p.add_argument("--expr", required=True)
    p.add_argument("--ops", required=True)
    p = add(fr, "convolve", cmd_fr_convolve, "csv", "convolution of two functions")
    p.add_argument("--expr", required=True)
    p.add_argument("--expr2", required=True)
    for q in (fr.choices["apply-op"], fr.choices["convolve"]):
        q.add_argument("--sample", help="output points a..b:step (default: integers)")
        q.add_argument("--N", type=int, default=1)
    p = add(fr, "norm", cmd_fr_norm, "json", "strong and weak FR norms")
    p.add_argument("--expr", required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--N", type=int, default=1)
    p = add(fr, "charfr", cmd_fr_charfr, "json", "is L^K f a remainder?")
    p.add_argument("--expr", required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--lo", type=float, default=5.0)
    p = add(fr, "pseudo", cmd_fr_pseudo, "csv", "pseudo-convolution over a level set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--level", default=None, help="level function in x1..xn (default: x1+...+xn)")
    p.add_argument("--phi", default="1")
    p.add_argument("--f", action="append", help="factor in x; repeat once per variable")
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--ell", required=True)
    p = add(fr, "class-e", cmd_fr_class_e, "json", "probe the classes E / calE")
    p.add_argument("--phi", required=True, help="function in x1..xn (the level function with --level-set)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--bound", type=float, default=1e3)
    p.add_argument("--width", type=float, default=30.0)
    p.add_argument("--points", type=int, default=9)
    p.add_argument("--level-set", action="store_true", help="test h - sum(x) in E")

    gr = sub.add_parser("graph", help="random regular graphs").add_subparsers(
        dest="graph_command", required=True, metavar="ACTION")

    def graph_src(q):
        q.add_argument("--n", type=int)
        q.add_argument("--d", type=int)
        q.add_argument("--graph-file")

    p = add(gr, "spectrum", cmd_graph_spectrum, "json", "adjacency spectrum and lambda_+")
    graph_src(p)
    p.add_argument("--dump-graph", help="write the edge list here")
    for name, fn in (("walks", cmd_graph_walks), ("irreducible", cmd_graph_irreducible)):
        p = add(gr, name, fn, "csv", "closed-walk counts" if name == "walks" else "irreducible closed-walk counts")
        graph_src(p)
        p.add_argument("--lmax", type=int, required=True)
        p.add_argument("--verify", action="store_true", help="compare with exhaustive enumeration")
    p = add(gr, "bound", cmd_graph_bound, "json", "trace bound |Tr A^l - d^l| <= n lambda_+^l")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lmax", type=int, required=True)
    p.add_argument("--trials", type=int, default=1)
    p = add(gr, "mc", cmd_graph_mc, "csv", "Monte-Carlo mean of irreducible loop counts")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--lmax", type=int, required=True)
    p.add_argument("--trials", type=int, default=10)
    p = add(gr, "fit", cmd_graph_fit, "json", "fit p(l)(d-1)^l and test residual growth")
    p.add_argument("--input", help="CSV written by 'graph mc'")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--lmax", type=int, default=12)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--degree", type=int, default=0)
    p.add_argument("--lo", type=int, default=1)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else USAGE
    if args.format is None:
        args.format = args.default_format
    if getattr(args, "fn", None) is cmd_fr_pseudo and args.level is None:
        args.level = "+".join(f"x{i + 1}" for i in range(args.n))
    if args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return USAGE
    try:
        return args.fn(args)
    except (InputError, OSError, ValueError, KeyError, graphlab.RejectionBudgetExceeded) as exc:
        args.parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    raise SystemExit(main())
