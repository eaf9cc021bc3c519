"""Differential evolution for dynamic constrained optimization problems,
with optional neural prediction of the moving optimum."""

from .core import Evaluation, Individual, RngStream, compare_feasibility
from .engine import Clock, DEParams, Diversity, DiversityKind, Reaction, RunConfig, run_dynamic
from .metrics import RunTrace, compute_report
from .problems import Experiment, ExperimentSpec, Landscape

__all__ = [
    "Clock",
    "DEParams",
    "Diversity",
    "DiversityKind",
    "Evaluation",
    "Experiment",
    "ExperimentSpec",
    "Individual",
    "Landscape",
    "Reaction",
    "RngStream",
    "RunConfig",
    "RunTrace",
    "compare_feasibility",
    "compute_report",
    "run_dynamic",
]
