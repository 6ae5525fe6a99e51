"""Evaluation methodology: paired sampling campaigns, scores and verdicts."""

from betrun.bench.campaign import CampaignConfig, CampaignReport, load_campaign, parse_campaign, run_campaign, write_report
from betrun.bench.evaluate import (
    BeatabilityReport,
    ScoreReport,
    ScoreRow,
    Setup,
    compare_samples,
    compare_to_f17,
    draw_samples,
    estimate_beatability,
    f17_setup,
    preset_setup,
    score,
    score_against_single_run,
    simulate,
    smallest_informative_init_budget,
)
from betrun.bench.stats import WilcoxonVerdict, wilcoxon_rank_sum

__all__ = [
    "BeatabilityReport",
    "CampaignConfig",
    "CampaignReport",
    "ScoreReport",
    "ScoreRow",
    "Setup",
    "WilcoxonVerdict",
    "compare_samples",
    "compare_to_f17",
    "draw_samples",
    "estimate_beatability",
    "f17_setup",
    "load_campaign",
    "parse_campaign",
    "preset_setup",
    "run_campaign",
    "score",
    "score_against_single_run",
    "simulate",
    "smallest_informative_init_budget",
    "wilcoxon_rank_sum",
    "write_report",
]
