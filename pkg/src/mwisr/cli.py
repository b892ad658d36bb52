"""Command-line harness: gen, solve, validate, compare, render.

Exit codes: 0 success, 2 validation failure, 3 precondition mismatch,
4 parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__, corpus, geodp, largerect, oracle, preprocess, qptas
from .geom import id_key
from .instance import Instance, InstanceError, digest, from_json, to_json
from .preprocess import PreconditionError
from .render import render_svg

EXIT_OK, EXIT_VALIDATION, EXIT_PRECONDITION, EXIT_PARSE = 0, 2, 3, 4
REPORT_VERSION = 1
LEMMAS = ("normalize", "stretch", "partition", "cut", "largerect")


def jsonable(obj):
    """Exact, deterministic JSON view: rationals become strings."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (set, frozenset)):
        return [jsonable(v) for v in sorted(obj, key=id_key)]
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_list"):
        return obj.to_list()
    if hasattr(obj, "item"):          # numpy scalars
        return obj.item()
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2) + "\n"


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path: str) -> Instance:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InstanceError(f"cannot read {path}: {e.strerror}") from None
    return from_json(text)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def _k(text: str):
    if text.lower() in ("inf", "none", "unlimited"):
        return None
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"k must be an integer or 'inf': {text!r}") from None


def _base(cmd: str, inst: Instance, args) -> dict:
    return {"command": cmd, "version": __version__, "report_version": REPORT_VERSION,
            "digest": digest(inst), "instance": {"n": inst.n, "N": inst.N, "eps": inst.eps,
                                                  "delta": inst.delta},
            "seeds": {"seed": getattr(args, "seed", None)}, "timings": {}}


# -- gen ---------------------------------------------------------------------

def cmd_gen(args) -> int:
    inst = corpus.generate(args.kind, n=args.n, N=args.N, seed=args.seed, delta=args.delta,
                           K=args.K, wmax=args.wmax, eps=args.eps)
    _emit(to_json(inst), args.out)
    return EXIT_OK


# -- solve -------------------------------------------------------------------

def _solver_config(args) -> geodp.SolverConfig:
    return geodp.SolverConfig(k=args.k, cut_families=args.families,
                              max_table_entries=args.max_table)


def run_solve(inst: Instance, cfg: geodp.SolverConfig, oracle_cap: int, compress: bool = True,
              normalize: bool = False, with_tree: bool = False):
    """Pipeline behind `solve`; returns (report body, solution, working instance)."""
    timings = {}
    work = inst
    stages = []
    if normalize:
        work, nrep = preprocess.normalize_weights(work)
        stages.append({"stage": "normalize", "dropped": sorted(nrep.dropped, key=id_key),
                       "unit_denominator": nrep.unit_denominator})
    if compress:
        work = preprocess.compress_coords(work)
        stages.append({"stage": "compress", "N": work.N})
    t0 = time.perf_counter()
    sol = geodp.solve(work, cfg)
    timings["solve_s"] = round(time.perf_counter() - t0, 6)
    ver = oracle.verify_solution(work, sol)
    # feasibility must also hold in the caller's coordinates
    orig = oracle.verify_solution(inst, sol.rect_ids)
    body = {"config": cfg.to_dict(), "stages": stages,
            "solution": sol.to_dict(with_tree=with_tree),
            "verify": {"ok": ver.ok and orig.ok, "overlapping_pairs": ver.overlapping_pairs,
                       "outside": ver.outside, "weight_ok": ver.weight_ok,
                       "original_coords_ok": orig.ok},
            "oracle": None, "ratio": None}
    if oracle_cap and work.n <= oracle_cap:
        t0 = time.perf_counter()
        opt = oracle.brute_force_opt(work, cap=oracle_cap)
        timings["oracle_s"] = round(time.perf_counter() - t0, 6)
        body["oracle"] = {"weight": opt.opt_weight, "ids": sorted(opt.opt_set, key=id_key),
                          "nodes": opt.nodes_explored}
        body["ratio"] = Fraction(sol.total_weight) / opt.opt_weight if opt.opt_weight else Fraction(1)
    body["timings"] = timings
    return body, sol, work


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    cfg = _solver_config(args)
    body, sol, work = run_solve(inst, cfg, args.oracle_cap, not args.no_compress,
                                args.normalize, args.tree)
    report = _base("solve", inst, args)
    timings = body.pop("timings")
    report.update(body)
    report["timings"] = timings
    _emit(dump_report(report), args.out)
    if args.svg:
        Path(args.svg).write_text(render_svg(work, sol.rect_ids, cut_tree=sol.cut_tree))
    return EXIT_OK if body["verify"]["ok"] else EXIT_VALIDATION


# -- validate ----------------------------------------------------------------

def _delta_for(inst: Instance, args, default=None) -> Fraction:
    d = args.delta if args.delta is not None else inst.delta
    if d is None:
        d = default
    if d is None:
        raise PreconditionError("this check needs --delta (or a delta in the instance)")
    return Fraction(d)


def _v_normalize(inst, args):
    if inst.n > args.oracle_cap:
        raise PreconditionError(f"n={inst.n} exceeds oracle cap {args.oracle_cap}")
    before = oracle.brute_force_opt(inst, cap=args.oracle_cap)
    scaled, rep = preprocess.normalize_weights(inst)
    after = oracle.brute_force_opt(inst.subset(r.id for r in scaled.rects), cap=args.oracle_cap)
    ok = after.opt_weight >= (1 - inst.eps) * before.opt_weight
    return {"ok": ok, "opt_before": before.opt_weight, "opt_after": after.opt_weight,
            "dropped": sorted(rep.dropped, key=id_key)}


def _v_stretch(inst, args):
    comp = preprocess.compress_coords(inst)
    out = preprocess.stretch_well_distributed(comp)
    eq = preprocess.is_combinatorially_equivalent(comp, out)
    wd = preprocess.is_well_distributed(out)
    bound = all(max(r.x2, r.y2) <= 4 * inst.n for r in out.rects)
    return {"ok": eq.ok and wd.ok and bound, "equivalent": eq.ok, "well_distributed": wd.ok,
            "violation": wd.violation, "mismatches": eq.mismatches[:5], "coords_within_4n": bound,
            "N": out.N}


def _prepared(inst, delta):
    work = qptas.prepare_instance(inst)
    scale = qptas.grid_scale_factor(work.N, delta)
    return preprocess.scale_coords(work, scale) if scale != 1 else work


def _v_partition(inst, args):
    delta = _delta_for(inst, args)
    if qptas.overlapping_pairs(inst.rects):
        raise PreconditionError("partition checks need pairwise disjoint rects")
    work = _prepared(inst, delta)
    lines = qptas.build_partition_lines(work, delta)
    graph = qptas.build_arrangement_graph(lines, work)
    rep = qptas.validate_partition(lines, graph, work)
    return {"ok": rep.ok, "violations": rep.violations[:10], "measures": rep.measures}


def _v_cut(inst, args):
    delta = _delta_for(inst, args, Fraction(1, 6))
    work = qptas.prepare_instance(inst)
    cut = qptas.balanced_cheap_cut(work, delta)
    W = cut.total_weight
    ok = 3 * cut.inside_weight <= 2 * W and 3 * cut.outside_weight <= 2 * W and \
        cut.inside_weight + cut.outside_weight + cut.crossed_weight == W
    inv4 = delta.denominator ** 4
    return {"ok": ok, "cut": cut.to_dict(),
            "crossed_over_W": Fraction(cut.crossed_weight) / W if W else Fraction(0),
            "edges_over_inv_delta4": Fraction(cut.edge_count, inv4)}


def _largerect_input(inst: Instance, cap: int):
    """The construction needs disjoint rects; overlapping input falls back to
    an optimal independent subset."""
    if not qptas.overlapping_pairs(inst.rects):
        return inst, None
    if inst.n > cap:
        raise PreconditionError("overlapping rects and n above the oracle cap")
    opt = oracle.brute_force_opt(inst, cap=cap)
    return inst.subset(opt.opt_set), "built on an optimal independent subset"


def _v_largerect(inst, args):
    delta = _delta_for(inst, args)
    work, note = _largerect_input(inst, args.oracle_cap)
    cfg = largerect.LargeRectConfig(args.eps if args.eps is not None else inst.eps, delta)
    part = largerect.build_partition(work, cfg)
    rep = largerect.validate_large_partition(part, work)
    return {"ok": rep.ok, "violations": rep.violations[:10], "measures": rep.measures,
            "subset": sorted((r.id for r in work.rects), key=id_key), "note": note}


_VALIDATORS = {"normalize": _v_normalize, "stretch": _v_stretch, "partition": _v_partition,
               "cut": _v_cut, "largerect": _v_largerect}


def run_validate(inst: Instance, args) -> tuple:
    verdicts, timings = {}, {}
    code = EXIT_OK
    for name in args.lemmas:
        t0 = time.perf_counter()
        try:
            verdicts[name] = _VALIDATORS[name](inst, args)
            if not verdicts[name]["ok"]:
                code = EXIT_VALIDATION
        except PreconditionError as e:
            verdicts[name] = {"ok": None, "precondition": str(e),
                              "offenders": sorted(e.offenders, key=id_key)}
            if code == EXIT_OK:
                code = EXIT_PRECONDITION
        except largerect.ConstructionError as e:
            verdicts[name] = {"ok": False, "error": str(e)}
            code = EXIT_VALIDATION
        timings[name + "_s"] = round(time.perf_counter() - t0, 6)
    return verdicts, timings, code


def cmd_validate(args) -> int:
    inst = _load(args.instance)
    verdicts, timings, code = run_validate(inst, args)
    report = _base("validate", inst, args)
    report.update({"lemmas": verdicts, "timings": timings, "exit_code": code})
    _emit(dump_report(report), args.out)
    return code


# -- compare -----------------------------------------------------------------

PRESETS = {
    "carve": geodp.SolverConfig(cut_families=(geodp.RECT_CARVE,)),
    "straight": geodp.SolverConfig(cut_families=(geodp.STRAIGHT_CUT,)),
    "mixed-k32": geodp.SolverConfig(k=32, cut_families=(geodp.STRAIGHT_CUT, geodp.RECT_CARVE,
                                                        geodp.staircase(3))),
}


def cmd_compare(args) -> int:
    rows = []
    timings = {}
    for path in args.instances:
        inst = _load(path)
        work = preprocess.compress_coords(inst)
        row = {"instance": path, "digest": digest(inst), "n": inst.n,
               "greedy": oracle.greedy_weight(work).total_weight, "oracle": None}
        t = {}
        for name, cfg in PRESETS.items():
            t0 = time.perf_counter()
            row[name] = geodp.solve(work, cfg).total_weight
            t[name + "_s"] = round(time.perf_counter() - t0, 6)
        if args.oracle_cap and inst.n <= args.oracle_cap:
            row["oracle"] = oracle.brute_force_opt(work, cap=args.oracle_cap).opt_weight
            if row["oracle"]:
                row["ratios"] = {k: Fraction(row[k]) / row["oracle"]
                                 for k in ["greedy", *PRESETS]}
        rows.append(row)
        timings[path] = t
    report = {"command": "compare", "version": __version__, "report_version": REPORT_VERSION,
              "presets": {k: v.to_dict() for k, v in PRESETS.items()}, "rows": rows,
              "timings": timings}
    _emit(dump_report(report), args.out)
    return EXIT_OK


# -- render ------------------------------------------------------------------

def cmd_render(args) -> int:
    inst = _load(args.instance)
    chosen = ()
    if args.report:
        rep = json.loads(Path(args.report).read_text())
        chosen = (rep.get("solution") or {}).get("rect_ids", ())
    lines, prov = (), None
    if args.layer == "partition":
        delta = _delta_for(inst, args)
        inst = _prepared(inst, delta)
        pl = qptas.build_partition_lines(inst, delta)
        lines, prov = pl.lines, pl.provenance
    elif args.layer == "largerect":
        delta = _delta_for(inst, args)
        inst, _ = _largerect_input(inst, args.oracle_cap)
        cfg = largerect.LargeRectConfig(inst.eps, delta)
        part = largerect.build_partition(inst, cfg)
        lines, prov = part.final.lines, part.final.provenance
    Path(args.svg).write_text(render_svg(inst, chosen, lines, prov))
    return EXIT_OK


# -- entry point -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    """Usage errors share the parse-error exit code; 2 is reserved for failed checks."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mwisr", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a seeded instance")
    g.add_argument("kind", choices=corpus.KINDS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--delta", type=_fraction)
    g.add_argument("--K", type=int)
    g.add_argument("--eps", type=_fraction, default=Fraction(1, 2))
    g.add_argument("--wmax", type=int, default=10)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="run the geometric DP")
    s.add_argument("instance")
    s.add_argument("--k", type=_k, default=None)
    s.add_argument("--families", default="RECT_CARVE")
    s.add_argument("--oracle-cap", type=int, default=20)
    s.add_argument("--max-table", type=int, default=500_000)
    s.add_argument("--no-compress", action="store_true")
    s.add_argument("--normalize", action="store_true")
    s.add_argument("--tree", action="store_true", help="include the cut tree")
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    s.add_argument("--svg")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="check structural guarantees on an instance")
    v.add_argument("instance")
    v.add_argument("--lemmas", default="stretch",
                   type=lambda t: [x.strip() for x in t.split(",") if x.strip()])
    v.add_argument("--delta", type=_fraction)
    v.add_argument("--eps", type=_fraction)
    v.add_argument("--oracle-cap", type=int, default=20)
    v.add_argument("--seed", type=int)
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("compare", help="greedy, DP presets and oracle side by side")
    c.add_argument("instances", nargs="+")
    c.add_argument("--oracle-cap", type=int, default=20)
    c.add_argument("--seed", type=int)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)

    r = sub.add_parser("render", help="draw an instance as SVG")
    r.add_argument("instance")
    r.add_argument("--svg", required=True)
    r.add_argument("--report", help="solve report whose solution is highlighted")
    r.add_argument("--layer", choices=("none", "partition", "largerect"), default="none")
    r.add_argument("--delta", type=_fraction)
    r.add_argument("--oracle-cap", type=int, default=20)
    r.add_argument("--seed", type=int)
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "validate":
        bad = [x for x in args.lemmas if x not in LEMMAS]
        if bad:
            parser.error(f"unknown lemma check(s) {bad}; choose from {', '.join(LEMMAS)}")
    if args.command == "solve":
        try:
            args.families = geodp.parse_families(args.families)
            if args.k is not None and args.k < 4:
                raise ValueError("--k must be at least 4")
        except ValueError as e:
            parser.error(str(e))
    try:
        return args.func(args)
    except InstanceError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (PreconditionError, corpus.GeneratorError) as e:
        print(f"precondition: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
