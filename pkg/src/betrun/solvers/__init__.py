"""Trace sources: toy TSP/MVC local searches and a synthetic curve generator."""

from betrun.solvers.live import LiveRun
from betrun.solvers.mvc import MvcInstance, greedy_cover, mvc_search, parse_edge_list, solve_mvc
from betrun.solvers.synthetic import SyntheticCurveSpec, crossing_time, generate_synthetic
from betrun.solvers.tsp import TspInstance, UnsupportedFormatError, parse_tsplib, solve_tsp, tsp_search

__all__ = [
    "LiveRun",
    "MvcInstance",
    "SyntheticCurveSpec",
    "TspInstance",
    "UnsupportedFormatError",
    "crossing_time",
    "generate_synthetic",
    "greedy_cover",
    "mvc_search",
    "parse_edge_list",
    "parse_tsplib",
    "solve_mvc",
    "solve_tsp",
    "tsp_search",
]
