"""Command-line entry point: ``specrewire {rewire,analyze,smooth,bench}``.

Exit codes: 0 on success, 2 on invalid input or configuration (nothing is
written), 3 when an eigensolver stopped before reaching its tolerance (all
outputs are still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
import warnings
from pathlib import Path


from . import __version__
from .analytic import CHEEGER_LIMIT, cheeger_constant, figure1_fixtures
from .errors import SpecRewireError
from .graph import (
    Direction,
    EdgeDelta,
    GeneratorSpec,
    Graph,
    apply_delta,
    generate,
    is_connected,
    read_edge_list,
    write_edge_list,
)
from .rewiring import RewirePlan, RewireTrace, Strategy, rewire
from .smoothing import DEFAULT_RIDGE_ALPHA, LabelConfig, class_mean_informativeness, smoothing_mse_curve
from .spectral import DENSE_LIMIT, SolverConfig, exact_gap, exact_spectrum, iterative_spectrum

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_CONVERGED = 3
OUT_ENV = "SPECREWIRE_OUT"


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ helpers

def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _header(seed: int, config: dict) -> tuple[str, ...]:
    return (f"seed={seed}", "config=" + json.dumps(config, sort_keys=True, separators=(",", ":")))


def _parse_edge(text: str) -> tuple[int, int]:
    try:
        u, v = (int(x) for x in text.replace(" ", "").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected U,V but got {text!r}") from None
    return u, v


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUT_ENV) or "specrewire-out")


def _write_all(out: Path, files: dict[str, str]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)


def _load_graph(args) -> tuple[Graph, dict]:
    if bool(args.gen) == bool(args.input):
        raise UsageError("give exactly one of --gen or --input")
    if args.gen:
        spec = GeneratorSpec.parse(args.gen, seed=args.seed)
        g, source = generate(spec), {"gen": spec.label()}
    else:
        path = Path(args.input)
        if not path.is_file():
            raise UsageError(f"input file {path} does not exist")
        g, source = read_edge_list(path.read_text()), {"input": str(path)}
    for u, v in getattr(args, "add", None) or ():
        g = apply_delta(g, EdgeDelta.add(u, v))
    if getattr(args, "add", None):
        source["pre_add"] = [list(e) for e in args.add]
    return g, source


def _solver(args) -> SolverConfig:
    return SolverConfig(tolerance=args.tolerance, max_iterations=args.max_iterations, method=args.solver)


def _plan(args, direction: str, strategy: str, budget: int) -> RewirePlan:
    return RewirePlan(
        direction=Direction.parse(direction),
        strategy=Strategy.parse(strategy),
        budget=budget,
        update_period=args.update_period,
        candidate_cap=args.candidate_cap or None,
        seed=args.seed,
        stop_on_criterion=args.stop_on_criterion,
        forbid_disconnect=args.forbid_disconnect,
        allow_disconnected_input=args.allow_disconnected,
        solver=_solver(args),
        threads=args.threads,
    )


def _trace_json(trace: RewireTrace) -> list[dict]:
    return [
        {"step": s.step, "edge": list(s.edge), "score": s.score, "gap_after": s.gap_after, "edges_total": s.edges_total}
        for s in trace.steps
    ]


# ----------------------------------------------------------------- commands

def cmd_rewire(args) -> int:
    g, source = _load_graph(args)
    direction, budget = args.direction, args.budget
    if args.delete is not None:
        if direction not in (None, "delete"):
            raise UsageError("--delete N conflicts with --direction add")
        direction, budget = "delete", args.delete
    if direction is None:
        raise UsageError("give --direction or --delete N")
    if budget is None:
        raise UsageError("give --budget N")
    plan = _plan(args, direction, args.strategy, budget)
    plan.validate(g)
    config = {"command": "rewire", **source, **plan.to_dict()}
    header = _header(args.seed, config)

    g2, trace = rewire(g, plan)

    summary = {
        "config": config,
        "seed": args.seed,
        **trace.summary(),
        "nodes": g2.num_nodes,
        "edges_before": g.num_edges,
        "edges_after": g2.num_edges,
        "edits": [list(e) for e in trace.edges],
        "warnings": trace.warnings,
    }
    files = {"rewired.el": write_edge_list(g2, header), "summary.json": _dumps(summary)}
    if args.format == "json":
        files["trace.json"] = _dumps({"config": config, "seed": args.seed, "steps": _trace_json(trace)})
    else:
        files["trace.csv"] = trace.to_csv(header)
    _write_all(_out_dir(args), files)
    if trace.warnings:
        for w in trace.warnings:
            print(f"warning: {w}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def analyze_graph(g: Graph, solver: SolverConfig) -> tuple[dict, bool]:
    """Gap, residual and (for small graphs) the Cheeger constant."""
    connected = is_connected(g)
    converged = True
    if g.num_nodes <= DENSE_LIMIT:
        est = exact_spectrum(g)
        gap, residual = est.gap, est.residual
    elif not connected:
        # kernel is at least two-dimensional
        gap, residual = 0.0, 0.0
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = iterative_spectrum(g, solver)
        gap, residual, converged = est.gap, est.residual, est.converged
    report = {
        "nodes": g.num_nodes,
        "edges": g.num_edges,
        "connected": connected,
        "gap": gap,
        "residual": residual,
    }
    if g.num_nodes <= CHEEGER_LIMIT:
        report["cheeger"] = cheeger_constant(g)
    return report, converged


def cmd_analyze(args) -> int:
    g, source = _load_graph(args)
    report, converged = analyze_graph(g, _solver(args))
    report["config"] = {"command": "analyze", **source, "solver": args.solver}
    report["seed"] = args.seed
    text = _dumps(report)
    sys.stdout.write(text)
    if args.out or os.environ.get(OUT_ENV):
        _write_all(_out_dir(args), {"analysis.json": text})
    return EXIT_OK if converged else EXIT_NOT_CONVERGED


def _read_labels(path: Path, n: int) -> LabelConfig:
    if not path.is_file():
        raise UsageError(f"label file {path} does not exist")
    try:
        vals = [int(tok) for tok in path.read_text().split()]
    except ValueError:
        raise UsageError(f"label file {path} must hold integers +1/-1") from None
    if len(vals) != n:
        raise UsageError(f"label file has {len(vals)} entries for {n} nodes")
    return LabelConfig(tuple(vals), path.stem)


def cmd_smooth(args) -> int:
    if args.fixture and (args.gen or args.input):
        raise UsageError("--fixture cannot be combined with --gen or --input")
    if args.fixture:
        if args.fixture != "figure1":
            raise UsageError(f"unknown fixture {args.fixture!r}")
        graphs = figure1_fixtures().graphs()
        source = {"fixture": args.fixture}
    else:
        g, source = _load_graph(args)
        graphs = {"input": g}
    n = next(iter(graphs.values())).num_nodes
    if args.labels_file:
        labels = _read_labels(Path(args.labels_file), n)
    else:
        labels = LabelConfig.named(args.labels, n)
    labels.check_both_classes()
    config = {
        "command": "smooth",
        **source,
        "labels": labels.name,
        "orders": args.orders,
        "trials": args.trials,
        "ridge_alpha": args.ridge_alpha,
        "dim": args.dim,
    }
    header = _header(args.seed, config)
    files = {}
    means = {}
    for name, g in graphs.items():
        rep = smoothing_mse_curve(g, labels, args.orders, args.trials, args.ridge_alpha, args.seed, args.dim)
        files[f"smooth_{name}.csv"] = rep.to_csv(header)
        pos, neg = class_mean_informativeness(g, labels)
        means[name] = {"positive": str(pos), "negative": str(neg)}
    files["smooth_summary.json"] = _dumps({"config": config, "seed": args.seed, "class_means_one_round": means})
    _write_all(_out_dir(args), files)
    return EXIT_OK


def _trajectory_csv(g: Graph, trace: RewireTrace, direction: Direction, exact: bool, header) -> str:
    lines = [f"# {h}" for h in header]
    lines.append(f"# initial_gap={trace.initial_gap:.17g}")
    lines.append("step,edge_u,edge_v,score,gap")
    cur = g
    for s in trace.steps:
        cur = apply_delta(cur, EdgeDelta(s.edge, direction))
        if exact:
            gap = f"{exact_gap(cur):.17g}"
        else:
            gap = "" if s.gap_after is None else f"{s.gap_after:.17g}"
        lines.append(f"{s.step},{s.edge[0]},{s.edge[1]},{s.score:.17g},{gap}")
    return "\n".join(lines) + "\n"


def cmd_bench(args) -> int:
    g, source = _load_graph(args)
    if args.budget < 0:
        raise UsageError("--budget must be >= 0")
    directions = ["add", "delete"] if args.direction == "both" else [args.direction]
    strategies = [s.value for s in Strategy] if args.strategy == "all" else [args.strategy]
    exact = not args.no_exact and g.num_nodes <= DENSE_LIMIT
    # validate every plan before running any of them
    plans = {}
    for d in directions:
        for s in strategies:
            plan = _plan(args, d, s, max(args.budget, 1))
            plan.validate(g)
            plans[d, s] = plan
    base = {"command": "bench", **source, "budget": args.budget, "exact_trajectory": exact}

    files = {}
    timing = ["direction,strategy,steps,seconds,terminal_reason,initial_gap,final_gap"]
    warned = []
    for (d, s), plan in plans.items():
        config = {**base, **plan.to_dict(), "budget": args.budget}
        header = _header(args.seed, config)
        if args.budget == 0:
            est = exact_spectrum(g) if exact else iterative_spectrum(g, plan.solver)
            trace = RewireTrace(est.gap, [], None, est.gap)
            seconds = 0.0
        else:
            t0 = time.perf_counter()
            _, trace = rewire(g, plan)
            seconds = time.perf_counter() - t0
        warned.extend(f"{d}/{s} {w}" for w in trace.warnings)
        files[f"trajectory_{d}_{s}.csv"] = _trajectory_csv(g, trace, plan.direction, exact, header)
        reason = trace.terminal_reason.value if trace.terminal_reason else ""
        timing.append(
            f"{d},{s},{len(trace.steps)},{seconds:.6f},{reason},{trace.initial_gap:.17g},{trace.final_gap:.17g}"
        )
    files["timings.csv"] = "\n".join([f"# {h}" for h in _header(args.seed, base)] + timing) + "\n"
    _write_all(_out_dir(args), files)
    for w in warned:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_NOT_CONVERGED if warned else EXIT_OK


# ------------------------------------------------------------------- parser

def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gen", help="generator spec: ring:N, path:N, complete:N or er:N:M")
    p.add_argument("--input", help="edge-list file ('u v' per line, '#' comments)")
    p.add_argument("--add", type=_parse_edge, action="append", metavar="U,V",
                   help="add this edge to the input before running (repeatable)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./specrewire-out)")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solver", choices=["power", "lanczos"], default="power")
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--max-iterations", type=int, default=5000)


def _add_plan(p: argparse.ArgumentParser, strategies=None, default="proxy") -> None:
    p.add_argument("--strategy", choices=strategies or [s.value for s in Strategy], default=default)
    p.add_argument("--update-period", type=int, default=1, metavar="M")
    p.add_argument("--candidate-cap", type=int, default=10_000, help="0 disables sampling")
    p.add_argument("--stop-on-criterion", action="store_true")
    p.add_argument("--forbid-disconnect", action="store_true")
    p.add_argument("--allow-disconnected", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    _add_solver(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="specrewire", description="Spectral-gap graph rewiring toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rewire", help="greedy edge additions or deletions")
    _add_input(p)
    _add_plan(p)
    p.add_argument("--direction", choices=["add", "delete"])
    p.add_argument("--budget", type=int)
    p.add_argument("--delete", type=int, metavar="N", help="shorthand for --direction delete --budget N")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_rewire)

    p = sub.add_parser("analyze", help="spectral gap, residual and Cheeger constant")
    _add_input(p)
    _add_solver(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("smooth", help="MSE vs order of mean aggregation")
    _add_input(p)
    p.add_argument("--fixture", help="named graph family (figure1)")
    p.add_argument("--labels", default="config1", help="named labelling config1..config4")
    p.add_argument("--labels-file", help="file with one +1/-1 label per node")
    p.add_argument("--orders", type=int, default=10, metavar="K")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--ridge-alpha", type=float, default=DEFAULT_RIDGE_ALPHA)
    p.add_argument("--dim", type=int, default=1)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("bench", help="compare strategies on one graph")
    _add_input(p)
    _add_plan(p, [s.value for s in Strategy] + ["all"], "all")
    p.add_argument("--direction", choices=["add", "delete", "both"], default="both")
    p.add_argument("--budget", type=int, default=15)
    p.add_argument("--no-exact", action="store_true", help="skip exact gap recomputation per step")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, SpecRewireError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
