"""Command-line front end: single experiments or a full configured run.

Every subcommand builds a :class:`~graphpotential.config.RunConfig` and hands
it to :func:`run`, so one-off commands and configured runs write the same
files: ``<experiment>-<graphhash>-<seed>.csv/.json`` (plus ``.dat`` for
profiles) and ``summary.json`` listing every assertion with its margin.
Exit status is 0 iff every assertion passes, 1 if any fails or a cell
raised, 2 on configuration errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .ancona import colinear_triples, estimate_lambda0
from .config import ExperimentConfig, LambdaGrid, RunConfig, validate
from .errors import ConfigParse, GraphPotentialError
from .experiments import DAT_COLUMNS, EXPERIMENTS
from .graph import all_vertex_points, delta_estimate, geodesic_ray
from .report import _jsonable, graph_from_spec, graph_hash

log = logging.getLogger("graphpotential")


def _run_cell(name: str, kwargs: dict):
    """Run one experiment; errors come back as ``(type name, message)``."""
    try:
        return EXPERIMENTS[name](**kwargs)
    except GraphPotentialError as exc:
        return (type(exc).__name__, str(exc))


def _error_assertion(cell: str, err: tuple[str, str]) -> dict:
    return {"cell": cell, "name": "completed", "passed": False, "margin": "nan",
            "detail": f"{err[0]}: {err[1]}"}


def run(cfg: RunConfig, out: str | None = None, threads: int = 1) -> tuple[int, dict]:
    """Execute every configured cell, write reports and ``summary.json``."""
    outdir = Path(out or cfg.output)
    outdir.mkdir(parents=True, exist_ok=True)
    summary: dict = {"config": cfg.to_dict(), "graph_hash": graph_hash(cfg.graph), "cells": [], "assertions": []}

    bad = dict(validate(cfg))
    lambda0, grid_error = cfg.lambdas.lambda0, None
    if lambda0 is None and cfg.lambdas.values is None and cfg.needs_grid():
        try:
            ex = estimate_lambda0(cfg.graph, cfg.lambdas.lambda0_h)
            lambda0 = ex.estimate
            summary["lambda0_exhaustion"] = _jsonable(ex.to_dict())
        except GraphPotentialError as exc:
            grid_error = (type(exc).__name__, str(exc))
    summary["lambda0"] = lambda0
    summary["lambda_grid"] = cfg.grid(lambda0)

    names = [e.name for e in cfg.experiments]
    stems = [n if names.count(n) == 1 else f"{n}{i}" for i, n in enumerate(names)]
    jobs, failed = [], []
    for i, e in enumerate(cfg.experiments):
        if i in bad:
            exc = bad[i]
            failed.append((i, cfg.seeds[0], (type(exc).__name__, str(exc))))
            continue
        if grid_error and (cfg.needs_grid()):
            failed.append((i, cfg.seeds[0], grid_error))
            continue
        one = RunConfig(cfg.graph, cfg.h, [e], cfg.lambdas, cfg.seeds, cfg.output, cfg.tolerances)
        try:
            for _, name, seed, kw in one.cells(lambda0):
                jobs.append((i, name, seed, kw))
        except GraphPotentialError as exc:
            failed.append((i, cfg.seeds[0], (type(exc).__name__, str(exc))))

    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_cell, [j[1] for j in jobs], [j[3] for j in jobs]))
    else:
        results = []
        for j in jobs:
            log.info("running %s (seed %s)", j[1], j[2])
            results.append(_run_cell(j[1], j[3]))

    records = [(i, seed, res) for (i, _, seed, _), res in zip(jobs, results)] + failed
    records.sort(key=lambda r: (r[0], r[1]))
    for i, seed, res in records:
        cell = f"{stems[i]}-{summary['graph_hash']}-{seed}"
        entry = {"cell": cell, "experiment": names[i], "index": i, "seed": seed}
        if isinstance(res, tuple):
            entry.update(status="error", error=f"{res[0]}: {res[1]}")
            summary["assertions"].append(_error_assertion(cell, res))
            log.warning("%s failed: %s: %s", cell, *res)
        else:
            dat = DAT_COLUMNS.get(names[i])
            paths = res.save(outdir, seed=seed, dat=dat, stem_name=stems[i])
            entry.update(status="ok", passed=res.passed, files=sorted(p.name for p in paths.values()))
            for a in res.assertions:
                summary["assertions"].append({"cell": cell, **a.to_dict()})
            log.info("%s: %s", cell, "pass" if res.passed else "FAIL")
        summary["cells"].append(entry)
    summary["passed"] = bool(summary["assertions"]) and all(a["passed"] for a in summary["assertions"])
    with open(outdir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(_jsonable(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return (0 if summary["passed"] else 1), summary


# -- argument handling -----------------------------------------------------------------------
def _json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"not valid JSON: {text!r} ({exc})") from exc


def _base(args) -> RunConfig:
    if args.config:
        cfg = RunConfig.load(args.config)
    else:
        if not getattr(args, "graph", None):
            raise ConfigParse("give --graph or --config")
        cfg = RunConfig(args.graph, 0.05, [ExperimentConfig("spectrum")])
    if getattr(args, "graph", None):
        cfg.graph = args.graph
    if args.h is not None:
        cfg.h = args.h
    if args.seed is not None:
        cfg.seeds = [args.seed]
    if getattr(args, "fractions", None):
        cfg.lambdas = LambdaGrid(fractions=args.fractions, lambda0=cfg.lambdas.lambda0)
    if getattr(args, "lambdas", None):
        cfg.lambdas = LambdaGrid(values=args.lambdas)
    if getattr(args, "lambda0", None) is not None:
        cfg.lambdas.lambda0 = args.lambda0
    return cfg


def _params(args, keys: dict[str, str]) -> dict:
    return {p: getattr(args, a) for a, p in keys.items() if getattr(args, a, None) is not None}


def _default_R(cfg: RunConfig, p: dict) -> dict:
    g = graph_from_spec(cfg.graph)
    if "R" not in p and g.truncation is not None:
        p["R"] = float(g.truncation.radius)
    return p


def _single(args, name: str, params: dict) -> int:
    cfg = _base(args)
    cfg.experiments = [ExperimentConfig(name, params)]
    return _finish(cfg, args)


def _finish(cfg: RunConfig, args) -> int:
    status, summary = run(cfg, args.out, args.threads)
    for a in summary["assertions"]:
        print(f"{'PASS' if a['passed'] else 'FAIL'}  {a['cell']}  {a['name']}  margin={a['margin']}  {a['detail']}")
    print(f"summary: {Path(args.out or cfg.output) / 'summary.json'}")
    return status


def cmd_graph(args) -> int:
    g = graph_from_spec(str(args.graph))
    info = {
        "graph": str(args.graph),
        "hash": graph_hash(args.graph),
        "vertices": g.n_vertices,
        "edges": g.n_edges,
        "l_min": g.l_min,
        "l_max": g.l_max,
        "total_length": float(sum(g.lengths)),
        "truncation": None if g.truncation is None else
        {"center": g.truncation.center, "radius": g.truncation.radius},
    }
    if args.delta:
        info["delta_estimate"] = delta_estimate(g, all_vertex_points(g), max_tuples=args.delta, seed=args.seed or 0)
    print(json.dumps(_jsonable(info), indent=2))
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / f"graph-{info['hash']}.json").write_text(g.to_json(), encoding="utf-8")
    return 0


def cmd_spectrum(args) -> int:
    return _single(args, "spectrum", _params(args, {"k": "k", "domain": "domain", "reference": "reference"}))


def cmd_heat(args) -> int:
    return _single(args, "heat", _params(args, {"x": "x", "y": "y", "t": "t_list", "domain": "domain"}))


def cmd_green(args) -> int:
    p = _params(args, {"lam": "lam", "lam_fraction": "lam_fraction", "domain": "domain"})
    p["pairs"] = args.pairs if args.pairs is not None else [[args.x, args.y]]
    return _single(args, "green", p)


def cmd_mc(args) -> int:
    return _single(args, "mc", _params(args, {"x": "x", "y": "y", "N": "N", "domain": "domain"}))


def cmd_ancona(args) -> int:
    cfg = _base(args)
    triples = args.triples
    if triples is None:
        triples = colinear_triples(cfg.graph, args.ys, [tuple(s) for s in args.splits])
    p = _params(args, {"R": "R", "identity_tol": "identity_tol", "spread_scales": "spread_scales"})
    cfg.experiments = [ExperimentConfig("ancona", _default_R(cfg, {"triples": triples, **p}))]
    return _finish(cfg, args)


def cmd_martin(args) -> int:
    cfg = _base(args)
    g = graph_from_spec(cfg.graph)
    steps = args.steps
    if g.truncation is not None:
        # the last ray vertex must stay off the Dirichlet boundary of the truncation ball
        steps = min(steps, int(g.truncation.radius) - 1)
    ray = geodesic_ray(g, args.x0, steps)
    p = _params(args, {"lam": "lam", "lam_fraction": "lam_fraction", "R": "R"})
    cfg.experiments = [ExperimentConfig("martin", _default_R(cfg, {"x0": args.x0, "x": args.x, "ray": ray, **p}))]
    return _finish(cfg, args)


def cmd_run(args) -> int:
    return _finish(_base(args), args)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory (default: the config's output)")
    common.add_argument("--seed", type=int)
    common.add_argument("--h", type=float, help="mesh step")
    common.add_argument("--threads", type=int, default=1, help="worker processes for independent cells")
    common.add_argument("--verbose", "-v", action="store_true")

    graph_opt = argparse.ArgumentParser(add_help=False)
    graph_opt.add_argument("--graph", help='graph spec, e.g. "regular_tree:degree=3,depth=8"')
    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--fractions", type=float, nargs="+", help="lambda grid as fractions of lambda0")
    grid.add_argument("--lambdas", type=float, nargs="+", help="absolute lambda grid")
    grid.add_argument("--lambda0", type=float, help="override the bottom-of-spectrum estimate")
    dom = argparse.ArgumentParser(add_help=False)
    dom.add_argument("--domain", type=_json, help='JSON domain, e.g. {"balls": [[0, 4.0]]}')

    ap = argparse.ArgumentParser(prog="graphpotential", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("graph", parents=[common, graph_opt], help="build and inspect a graph")
    s.add_argument("--delta", type=int, default=0, help="estimate delta from this many 4-point samples")
    s.set_defaults(func=cmd_graph)

    s = sub.add_parser("spectrum", parents=[common, graph_opt, dom], help="lowest Dirichlet eigenvalues")
    s.add_argument("--k", type=int)
    s.add_argument("--reference", type=float, nargs="+")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("heat", parents=[common, graph_opt, dom], help="heat kernel between two points")
    s.add_argument("--x", type=_json, required=True)
    s.add_argument("--y", type=_json, required=True)
    s.add_argument("--t", type=float, nargs="+", required=True)
    s.set_defaults(func=cmd_heat)

    s = sub.add_parser("green", parents=[common, graph_opt, dom, grid], help="relative Green function values")
    s.add_argument("--lam", type=float)
    s.add_argument("--lam-fraction", type=float)
    s.add_argument("--x", type=_json)
    s.add_argument("--y", type=_json)
    s.add_argument("--pairs", type=_json)
    s.set_defaults(func=cmd_green)

    s = sub.add_parser("mc", parents=[common, graph_opt, dom, grid], help="Monte Carlo against the solver")
    s.add_argument("--x", type=_json, required=True)
    s.add_argument("--y", type=_json, required=True)
    s.add_argument("--N", type=int, default=100_000)
    s.set_defaults(func=cmd_mc)

    s = sub.add_parser("ancona", parents=[common, graph_opt, grid], help="Ancona ratios over colinear triples")
    s.add_argument("--R", type=float)
    s.add_argument("--triples", type=_json)
    s.add_argument("--ys", type=_json, default=[0])
    s.add_argument("--splits", type=_json, default=[[1, 1], [2, 2], [3, 3], [4, 4]])
    s.add_argument("--identity-tol", type=float)
    s.add_argument("--spread-scales", type=float, nargs=2)
    s.set_defaults(func=cmd_ancona)

    s = sub.add_parser("martin", parents=[common, graph_opt, grid], help="Martin kernel convergence along a ray")
    s.add_argument("--lam", type=float)
    s.add_argument("--lam-fraction", type=float)
    s.add_argument("--x0", type=int, default=0)
    s.add_argument("--x", type=_json, required=True)
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--R", type=float)
    s.set_defaults(func=cmd_martin)

    s = sub.add_parser("run", parents=[common], help="execute a full TOML configuration")
    s.set_defaults(func=cmd_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.command == "run" and not args.config:
        print("error: run needs --config", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except ConfigParse as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
