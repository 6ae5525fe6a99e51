"""Campaign configuration files and report writing.

A campaign file is INI-style text::

    [campaign]
    datasets = data/inst1, data/inst2   # trace directories, relative to this file
    seed = 7
    samples = 20
    tau = zero                          # zero | measured
    reference = f17                     # preset used for Wilcoxon verdicts, or none
    presets = single, f17               # extra preset setups (optional)
    output = report                     # report directory

    [grid]
    total_budget_ms = 10000, 20000
    init_fraction = 0.4                 # or init_budget_ms = 4000, 8000
    k = 40
    m = 1
    strategy = even
    deciders = current-best, diminishing-returns

Every grid point (T, t1, k, m, strategy, decider) becomes one setup.  All
setups of one instance share the same sampled run sets.
"""

from __future__ import annotations

import configparser
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from betrun.bench.evaluate import (
    ScoreRow,
    Setup,
    compare_samples,
    draw_samples,
    preset_setup,
    sample_checksum,
    sample_seeds,
    score_row,
    simulate,
    single_run_baseline,
)
from betrun.bench.stats import VERDICTS, WilcoxonVerdict
from betrun.budget import TAU_MODES, preset
from betrun.deciders import is_known_decider
from betrun.errors import BetRunError, ConfigError
from betrun.rng import derive_seed
from betrun.trace import TraceDataset, read_dataset

NUMBER_FORMAT = ".12g"


def fmt(value) -> str:
    """Fixed text form: integers as-is, floats with 12 significant digits."""
    if value is None:
        return "NA"
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return format(value, NUMBER_FORMAT)


@dataclass
class CampaignConfig:
    datasets: list[Path]
    total_budgets: list[int]
    setups: list[Setup]
    samples: int
    seed: int
    tau_mode: str = "zero"
    reference: Optional[str] = "f17"
    output: Optional[Path] = None


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _ints(section, key, default=None) -> list[int]:
    if key not in section:
        if default is None:
            raise ConfigError(f"missing key {key!r} in [{section.name}]")
        return list(default)
    try:
        return [int(v) for v in _split(section[key])]
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: expected integers, got {section[key]!r}") from None


def _floats(section, key) -> list[float]:
    try:
        return [float(v) for v in _split(section[key])]
    except ValueError:
        raise ConfigError(f"[{section.name}] {key}: expected numbers, got {section[key]!r}") from None


def _grid_label(decider, k, m, strategy, t1_text) -> str:
    return f"{decider}/k{k}/m{m}/{strategy}/t1={t1_text}"


def parse_campaign(text: str, base_dir: str | Path = ".") -> CampaignConfig:
    base_dir = Path(base_dir)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"campaign file: {exc}") from None
    if "campaign" not in parser:
        raise ConfigError("campaign file needs a [campaign] section")
    camp = parser["campaign"]
    datasets = [base_dir / p for p in _split(camp.get("datasets", ""))]
    if not datasets:
        raise ConfigError("[campaign] datasets is empty")
    try:
        seed = int(camp.get("seed", "0"))
        samples = int(camp.get("samples", "20"))
    except ValueError as exc:
        raise ConfigError(f"[campaign] {exc}") from None
    if samples < 1:
        raise ConfigError("[campaign] samples must be >= 1")
    tau_mode = camp.get("tau", "zero").strip()
    if tau_mode not in TAU_MODES:
        raise ConfigError(f"[campaign] tau must be one of {TAU_MODES}")
    reference = camp.get("reference", "f17").strip()
    reference = None if reference.lower() in ("", "none") else reference
    output = camp.get("output")
    output = base_dir / output.strip() if output else None

    setups: list[Setup] = []
    for name in _split(camp.get("presets", "")):
        preset(name, 1_000_000)  # validates the name
        setups.append(preset_setup(name))

    budgets: list[int] = []
    if "grid" in parser:
        grid = parser["grid"]
        budgets = _ints(grid, "total_budget_ms")
        ks = _ints(grid, "k")
        ms = _ints(grid, "m", [1])
        strategies = _split(grid.get("strategy", "even"))
        deciders = _split(grid.get("deciders", "current-best"))
        for d in deciders:
            if not is_known_decider(d):
                raise ConfigError(f"unknown decider {d!r}")
        if "init_budget_ms" in grid:
            inits = [("ms", v) for v in _ints(grid, "init_budget_ms")]
        elif "init_fraction" in grid:
            inits = [("fraction", v) for v in _floats(grid, "init_fraction")]
        else:
            raise ConfigError("[grid] needs init_budget_ms or init_fraction")
        for (kind, init), k, m, strategy, decider in itertools.product(inits, ks, ms, strategies, deciders):
            if kind == "ms":
                setups.append(Setup(_grid_label(decider, k, m, strategy, f"{init}ms"), decider, k, m, init_budget=init, strategy=strategy))
            else:
                setups.append(Setup(_grid_label(decider, k, m, strategy, fmt(init) + "T"), decider, k, m, init_fraction=init, strategy=strategy))
    else:
        budgets = _ints(camp, "total_budget_ms")
    if not setups:
        raise ConfigError("campaign defines no setups")
    labels = [s.label for s in setups]
    if len(set(labels)) != len(labels):
        raise ConfigError("duplicate setup labels in campaign")
    if reference is not None:
        preset(reference, 1_000_000)
    cfg = CampaignConfig(datasets, budgets, setups, samples, seed, tau_mode, reference, output)
    for T in budgets:
        for s in setups:
            s.plan(T)  # surface invalid grid points before any work
    return cfg


def load_campaign(path: str | Path) -> CampaignConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"campaign file not found: {path}") from None
    return parse_campaign(text, path.parent)


# -- execution -----------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    instance: str
    setup: str
    total_budget: int
    init_budget: int
    k: int
    m: int
    strategy: str
    decider: str
    sample: int
    final_quality: Optional[float]
    tau: int
    winner: Optional[str]


@dataclass
class CampaignReport:
    results: list[ResultRow] = field(default_factory=list)
    scores: list[ScoreRow] = field(default_factory=list)
    verdicts: list[tuple[str, str, int, str, WilcoxonVerdict]] = field(default_factory=list)
    self_test: list[ScoreRow] = field(default_factory=list)
    checksums: dict[str, str] = field(default_factory=dict)

    def verdict_counts(self) -> list[tuple[str, int, dict[str, int]]]:
        acc: dict[tuple[str, int], dict[str, int]] = {}
        for _, setup, T, _, v in self.verdicts:
            counts = acc.setdefault((setup, T), dict.fromkeys(VERDICTS, 0))
            counts[v.verdict] += 1
        return [(setup, T, counts) for (setup, T), counts in acc.items()]

    def mean_scores(self) -> list[tuple[str, int, float]]:
        acc: dict[tuple[str, int], list[float]] = {}
        for r in self.scores:
            acc.setdefault((r.setup, r.total_budget), []).append(r.mean_score)
        return [(s, T, sum(v) / len(v)) for (s, T), v in acc.items()]


def run_campaign(cfg: CampaignConfig, jobs: int = 1, datasets: Optional[Sequence[TraceDataset]] = None) -> CampaignReport:
    if datasets is None:
        datasets = [read_dataset(p) for p in cfg.datasets]
    single = preset_setup("single")
    reference = preset_setup(cfg.reference) if cfg.reference else None
    report = CampaignReport()
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for j, ds in enumerate(datasets):
            plans = [s.plan(T) for T in cfg.total_budgets for s in cfg.setups]
            if reference is not None:
                plans += [reference.plan(T) for T in cfg.total_budgets]
            k_max = max(p.num_initial_runs for p in plans)
            if k_max > len(ds.traces):
                raise ConfigError(f"instance {ds.instance_name!r} has {len(ds.traces)} traces; a setup needs {k_max}")
            rows = draw_samples(len(ds.traces), k_max, cfg.samples, derive_seed(cfg.seed, j))
            seeds = sample_seeds(cfg.seed, j, cfg.samples)
            checksum = sample_checksum(ds, rows)
            report.checksums[ds.instance_name] = checksum

            def run(setup, T):
                return simulate(ds.traces, setup, T, rows, seeds, cfg.tau_mode, jobs, pool)

            for T in cfg.total_budgets:
                baseline = single_run_baseline(ds.traces, rows, T)
                selftest = score_row(ds.instance_name, single.label, T, [r.final_quality for r in run(single, T)], baseline, checksum)
                report.self_test.append(selftest)
                if selftest.wins or selftest.losses:
                    raise RuntimeError(f"single-run self-test failed on {ds.instance_name!r} at T={T}")
                ref_finals = [r.final_quality for r in run(reference, T)] if reference is not None else None
                for setup in cfg.setups:
                    plan = setup.plan(T)
                    results = run(setup, T)
                    finals = [r.final_quality for r in results]
                    for s, r in enumerate(results):
                        report.results.append(
                            ResultRow(ds.instance_name, setup.label, T, plan.init_budget, plan.num_initial_runs,
                                      plan.num_continued_runs, plan.strategy, setup.decider, s, r.final_quality, r.tau, r.winner)
                        )
                    report.scores.append(score_row(ds.instance_name, setup.label, T, finals, baseline, checksum))
                    if ref_finals is not None:
                        v = compare_samples(finals, ref_finals, ds)
                        report.verdicts.append((ds.instance_name, setup.label, T, reference.label, v))
    finally:
        if pool is not None:
            pool.shutdown()
    return report


# -- output --------------------------------------------------------------------


def _csv(header_comment: str, columns: Sequence[str], rows) -> str:
    lines = [f"# {header_comment}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(v) if not isinstance(v, str) else v for v in row))
    return "\n".join(lines) + "\n"


def summary_table(report: CampaignReport) -> str:
    counts = {(s, T): c for s, T, c in report.verdict_counts()}
    header = ["setup", "T", "mean_score"] + list(VERDICTS)
    body = []
    for setup, T, mean in report.mean_scores():
        c = counts.get((setup, T))
        body.append([setup, str(T), format(mean, "+.4f")] + ([str(c[v]) for v in VERDICTS] if c else ["-"] * len(VERDICTS)))
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) if i == 0 else cell.rjust(w) for i, (cell, w) in enumerate(zip(r, widths))) for r in [header] + body]
    selftest = "pass" if all(r.wins == 0 and r.losses == 0 for r in report.self_test) else "FAIL"
    lines.append(f"single-run self-test: {selftest} on {len(report.self_test)} instance/budget pairs")
    return "\n".join(lines) + "\n"


def write_report(report: CampaignReport, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise BetRunError(f"cannot create report directory {directory}: {exc}") from None
    files = {
        "results.csv": _csv(
            "one row per (instance, setup, budget, sample); final_quality NA when the winner never recorded a point",
            ["instance", "setup", "T", "t1", "k", "m", "strategy", "decider", "sample", "final_quality", "tau", "winner"],
            ((r.instance, r.setup, r.total_budget, r.init_budget, r.k, r.m, r.strategy, r.decider, r.sample,
              r.final_quality, r.tau, r.winner or "NA") for r in report.results),
        ),
        "scores.csv": _csv(
            "score vs single run over the whole budget: mean of -1 win / +1 loss / 0 tie; sample_checksum identifies the paired run sets",
            ["instance", "setup", "T", "samples", "wins", "losses", "ties", "mean_score", "sample_checksum"],
            ((r.instance, r.setup, r.total_budget, r.samples, r.wins, r.losses, r.ties, r.mean_score, r.sample_checksum)
             for r in report.scores),
        ),
        "verdicts.csv": _csv(
            "two-sided Wilcoxon rank-sum of setup vs reference on final quality gap, alpha 0.05; verdict from the setup's perspective",
            ["instance", "setup", "T", "reference", "verdict", "p_value", "rank_sum", "method"],
            ((inst, setup, T, ref, v.verdict, v.p_value, v.statistic, v.method) for inst, setup, T, ref, v in report.verdicts),
        ),
        "verdict_counts.csv": _csv(
            "per setup and budget: number of instances in each verdict class",
            ["setup", "T"] + list(VERDICTS),
            ((setup, T, *(c[v] for v in VERDICTS)) for setup, T, c in report.verdict_counts()),
        ),
        "summary.txt": summary_table(report),
    }
    paths = []
    for name, content in files.items():
        path = directory / name
        path.write_text(content, encoding="utf-8")
        paths.append(path)
    return paths
