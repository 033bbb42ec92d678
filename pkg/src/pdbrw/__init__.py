"""Branching random walks with exponential steps: exact analytics, keyed
samplers, minimal-displacement search, path laws, recursive trees and the
experiment harness tying them together."""

from .analytics import (
    LevelClass,
    LogValue,
    count_tnk,
    count_tnk_exact,
    d_of_m,
    expected_tn,
    f_nk,
    f_nk_stirling,
    gamma_density,
    har,
    m_n,
    poisson_tail,
)
from .engine import CensusTable, SearchResult, WorkLimitExceeded, census, \
    lowest_m, min_displacement
from .harness import ExperimentSpec, RunResult, load_spec, run_experiment, \
    write_outputs
from .pratt import PrattTree, build_pratt, is_prime, pratt_height, pratt_survey
from .rng import RngStream
from .samplers import MODELS, PD, PWIT, ChildDisplacement, DisplacementStream
from .stats import StatSummary, TailFitResult, fit_tail_rates
from .trees import RecursiveTree, build_rrt, height_tail, rrt_from_pwit
from .walks import EventParams, WalkSample, condition_on_endpoint, \
    estimate_event_prob, event_flags, rotations, sample_h, sample_walk

__version__ = "0.1.0"

__all__ = [
    "LevelClass", "LogValue", "count_tnk", "count_tnk_exact", "d_of_m",
    "expected_tn", "f_nk", "f_nk_stirling", "gamma_density", "har", "m_n",
    "poisson_tail",
    "CensusTable", "SearchResult", "WorkLimitExceeded", "census", "lowest_m",
    "min_displacement",
    "ExperimentSpec", "RunResult", "load_spec", "run_experiment",
    "write_outputs",
    "PrattTree", "build_pratt", "is_prime", "pratt_height", "pratt_survey",
    "RngStream",
    "MODELS", "PD", "PWIT", "ChildDisplacement", "DisplacementStream",
    "StatSummary", "TailFitResult", "fit_tail_rates",
    "RecursiveTree", "build_rrt", "height_tail", "rrt_from_pwit",
    "EventParams", "WalkSample", "condition_on_endpoint",
    "estimate_event_prob", "event_flags", "rotations", "sample_h",
    "sample_walk",
    "__version__",
]
