"""``betrun`` command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from betrun.bench.campaign import fmt, load_campaign, run_campaign, summary_table, write_report
from betrun.bench.evaluate import compare_to_f17, default_jobs, draw_samples, estimate_beatability
from betrun.budget import BudgetPlan, ReplayRun, preset, run_bet_and_run
from betrun.deciders import is_known_decider
from betrun.errors import BetRunError, ConfigError, TraceError
from betrun.rng import derive_seed, make_rng
from betrun.trace import TraceDataset, format_quality, read_dataset, serialize_trace, write_dataset

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load_instance(path: str, solver: Optional[str]):
    from betrun.solvers.mvc import parse_edge_list
    from betrun.solvers.tsp import parse_tsplib

    p = Path(path)
    if solver is None:
        solver = "tsp" if p.suffix.lower() == ".tsp" else "mvc"
    try:
        text = p.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"instance file not found: {p}") from None
    if solver == "tsp":
        return solver, parse_tsplib(text)
    return solver, parse_edge_list(text, name=p.stem)


def _search(solver: str, instance, seed: int):
    from betrun.solvers.mvc import mvc_search
    from betrun.solvers.tsp import tsp_search

    fn = tsp_search if solver == "tsp" else mvc_search
    return fn(instance, make_rng(seed))


# -- run -----------------------------------------------------------------------


def _plan_from_args(args) -> tuple[BudgetPlan, str]:
    T = args.budget_ms
    if args.preset:
        plan, decider = preset(args.preset, T)
        if args.k is not None or args.t1_ms is not None or args.m is not None:
            raise UsageError("--preset cannot be combined with --k, --t1-ms or --m")
    else:
        if args.k is None or args.t1_ms is None:
            raise UsageError("give --preset or both --k and --t1-ms")
        plan = BudgetPlan(T, args.t1_ms, args.k, args.m or 1, args.strategy)
        decider = "current-best"
    return plan, args.decider or decider


def cmd_run(args) -> int:
    plan, decider = _plan_from_args(args)
    if not is_known_decider(decider):
        raise ConfigError(f"unknown decider {decider!r}")
    k = plan.num_initial_runs
    if args.mode == "replay":
        if not args.dataset:
            raise UsageError("--mode replay needs --dataset")
        ds = read_dataset(args.dataset)
        row = draw_samples(len(ds.traces), k, 1, args.seed)[0]
        sources = [ReplayRun(ds.traces[int(j)]) for j in row]
        instance = ds.instance_name
    else:
        from betrun.solvers.live import LiveRun

        if not args.instance:
            raise UsageError("--mode live needs --instance")
        solver, inst = _load_instance(args.instance, args.solver)
        sources = [LiveRun(_search(solver, inst, derive_seed(args.seed, i)), f"run{i + 1}", args.clock) for i in range(k)]
        instance = inst.name
    tau_mode = args.tau or ("zero" if args.mode == "replay" else "measured")
    res = run_bet_and_run(plan, sources, decider, tau_mode=tau_mode, seed=args.seed)
    q = "NA" if res.final_quality is None else format_quality(res.final_quality)
    print(",".join([instance, decider, str(plan.total_budget), str(plan.init_budget), str(k),
                    str(plan.num_continued_runs), str(res.tau), q, res.winner_run_id or "NA"]))
    return EXIT_OK


# -- campaign ------------------------------------------------------------------


def cmd_campaign(args) -> int:
    cfg = load_campaign(args.config)
    out = Path(args.output) if args.output else cfg.output
    if out is None:
        raise UsageError("no output directory: set [campaign] output or pass --output")
    report = run_campaign(cfg, jobs=args.jobs)
    write_report(report, out)
    sys.stdout.write(summary_table(report))
    return EXIT_OK


# -- gen-traces ----------------------------------------------------------------


def _synthetic_traces(args) -> TraceDataset:
    from betrun.solvers.synthetic import SyntheticCurveSpec, generate_synthetic

    rng = make_rng(args.seed, 1)
    traces = []
    for j in range(args.n):
        q_inf = args.q_inf * (1 + args.spread * (2 * rng.random() - 1))
        amp = args.amplitude * (1 + args.spread * (2 * rng.random() - 1))
        spec = SyntheticCurveSpec(q_inf, amp, args.decay, gap_mean=args.gap_mean, gap_growth=args.gap_growth,
                                  horizon=args.budget_ms, quantum=args.quantum, seed=derive_seed(args.seed, j))
        traces.append(generate_synthetic(spec, run_id=f"run{j + 1}"))
    return TraceDataset(args.name or "synthetic", traces, args.bound)


def _solver_traces(args) -> TraceDataset:
    from betrun.solvers.mvc import solve_mvc
    from betrun.solvers.tsp import solve_tsp

    if not args.instance:
        raise UsageError(f"--source {args.source} needs --instance")
    solver, inst = _load_instance(args.instance, args.source)
    solve = solve_tsp if solver == "tsp" else solve_mvc
    traces = [solve(inst, args.budget_ms, seed=derive_seed(args.seed, j), run_id=f"run{j + 1}") for j in range(args.n)]
    return TraceDataset(args.name or inst.name, traces, args.bound)


def cmd_gen_traces(args) -> int:
    if args.n < 1 or args.budget_ms < 1:
        raise UsageError("--n and --budget-ms must be positive")
    ds = _synthetic_traces(args) if args.source == "synthetic" else _solver_traces(args)
    try:
        write_dataset(ds, args.out)
    except OSError as exc:
        raise BetRunError(f"cannot write dataset to {args.out}: {exc}") from None
    back = read_dataset(args.out)
    if [serialize_trace(t) for t in back.traces] != [serialize_trace(t) for t in ds.traces]:
        raise BetRunError("written dataset does not round-trip")
    print(f"wrote {len(ds.traces)} traces to {args.out}")
    return EXIT_OK


# -- beatability / compare-f17 -------------------------------------------------


def cmd_beatability(args) -> int:
    datasets = [read_dataset(d) for d in args.dataset]
    rep = estimate_beatability(datasets, args.budget_ms, args.t1_ms, args.k, args.samples, args.seed)
    print("instance,probability")
    for name, p in rep.probabilities.items():
        print(f"{name},{fmt(p)}")
    print(f"# instances_beatable={rep.instances_beatable} mean_probability={fmt(rep.mean_probability)}")
    return EXIT_OK


def cmd_compare_f17(args) -> int:
    for d in args.decider:
        if not is_known_decider(d):
            raise ConfigError(f"unknown decider {d!r}")
    datasets = [read_dataset(d) for d in args.dataset]
    table = compare_to_f17(datasets, args.budget_ms, args.decider, args.samples, args.seed, k=args.k, jobs=args.jobs)
    print("decider,instance,verdict,p_value,rank_sum,method")
    for d, per in table.items():
        for inst, v in per.items():
            print(f"{d},{inst},{v.verdict},{fmt(v.p_value)},{fmt(v.statistic)},{v.method}")
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="betrun", description="Bet-and-run restart strategies on anytime runs.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute one bet-and-run and print a result line")
    r.add_argument("--mode", choices=("replay", "live"), default="replay", help="replay recorded traces or drive a solver")
    r.add_argument("--dataset", help="trace directory (replay mode)")
    r.add_argument("--instance", help="TSPLIB or edge-list file (live mode)")
    r.add_argument("--solver", choices=("tsp", "mvc"), help="solver for --instance; inferred from the .tsp suffix otherwise")
    r.add_argument("--clock", choices=("virtual", "wall"), default="virtual", help="live time base: 1 step = 1 ms, or wall time")
    r.add_argument("--preset", help="single, f17, restarts(k) or luby_restarts(k)")
    r.add_argument("--budget-ms", type=int, required=True, help="total budget T in ms")
    r.add_argument("--t1-ms", type=int, help="initialization budget t1 in ms")
    r.add_argument("--k", type=int, help="number of initial runs")
    r.add_argument("--m", type=int, help="number of continued runs (default 1)")
    r.add_argument("--strategy", choices=("even", "luby"), default="even", help="split of t1 among the initial runs")
    r.add_argument("--decider", help="decider identifier (default current-best)")
    r.add_argument("--seed", type=int, default=0, help="master seed")
    r.add_argument("--tau", choices=("measured", "zero"), help="charge measured decision time or none (default: zero for replay, measured for live)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("campaign", help="run a sampling campaign from a config file")
    c.add_argument("config", help="campaign config file")
    c.add_argument("--output", help="report directory (overrides the config)")
    c.add_argument("--jobs", type=int, default=default_jobs(), help="worker processes (default: available cores)")
    c.set_defaults(func=cmd_campaign)

    g = sub.add_parser("gen-traces", help="write a trace dataset")
    g.add_argument("--source", choices=("synthetic", "tsp", "mvc"), required=True, help="trace generator")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--n", type=int, default=100, help="number of traces")
    g.add_argument("--budget-ms", type=int, default=100_000, help="length of every run in ms (virtual steps for solvers)")
    g.add_argument("--seed", type=int, default=0, help="master seed")
    g.add_argument("--instance", help="instance file for tsp/mvc")
    g.add_argument("--name", help="instance name stored in meta")
    g.add_argument("--bound", type=float, help="known optimum or lower bound stored in meta")
    g.add_argument("--q-inf", type=float, default=1000.0, help="synthetic: asymptotic quality")
    g.add_argument("--amplitude", type=float, default=500.0, help="synthetic: curve amplitude")
    g.add_argument("--decay", type=float, default=0.5, help="synthetic: power-law exponent")
    g.add_argument("--spread", type=float, default=0.05, help="synthetic: relative per-run jitter of q-inf and amplitude")
    g.add_argument("--gap-mean", type=float, default=20.0, help="synthetic: mean first gap between candidate times (ms)")
    g.add_argument("--gap-growth", type=float, default=1.0, help="synthetic: growth factor of the mean gap")
    g.add_argument("--quantum", type=float, default=1.0, help="synthetic: quality rounding unit")
    g.set_defaults(func=cmd_gen_traces)

    b = sub.add_parser("beatability", help="probability that the early best run is beaten")
    b.add_argument("--dataset", action="append", required=True, help="trace directory (repeatable)")
    b.add_argument("--budget-ms", type=int, required=True, help="total budget T in ms")
    b.add_argument("--t1-ms", type=int, required=True, help="initialization budget t1 in ms")
    b.add_argument("--k", type=int, default=40, help="runs per sample")
    b.add_argument("--samples", type=int, default=100_000, help="number of samples")
    b.add_argument("--seed", type=int, default=0, help="master seed")
    b.set_defaults(func=cmd_beatability)

    f = sub.add_parser("compare-f17", help="Wilcoxon verdicts of deciders against F17")
    f.add_argument("--dataset", action="append", required=True, help="trace directory (repeatable)")
    f.add_argument("--budget-ms", type=int, required=True, help="total budget T in ms")
    f.add_argument("--decider", action="append", required=True, help="challenger decider (repeatable)")
    f.add_argument("--k", type=int, default=40, help="initial runs for both sides; t1 = k%% of T")
    f.add_argument("--samples", type=int, default=1000, help="samples per instance")
    f.add_argument("--seed", type=int, default=0, help="master seed")
    f.add_argument("--jobs", type=int, default=default_jobs(), help="worker processes (default: available cores)")
    f.set_defaults(func=cmd_compare_f17)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError, TraceError, FileNotFoundError) as exc:
        print(f"betrun: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BetRunError, RuntimeError, OSError, ValueError) as exc:
        print(f"betrun: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
