"""Laboratory for the (mu+1) evolutionary algorithm with clearing niching
on bitstring landscapes: exact simulation engines, closed-form oracles,
and a reproducible experiment harness."""

from .clearing import ClearingParams, DistanceMeasure, clear, derived_param, is_winner, niche_report
from .core import (
    Bitstring,
    Individual,
    Population,
    RngHandle,
    ValidationError,
    hamming,
    mutate,
    random_bitstring,
)
from .engine import EaConfig, RunOutcome, age_profile, potential, run, step
from .landscapes import Landscape, Peak, basin_boundary, complementary_peaks, twomax

__all__ = [
    "Bitstring",
    "ClearingParams",
    "DistanceMeasure",
    "EaConfig",
    "Individual",
    "Landscape",
    "Peak",
    "Population",
    "RngHandle",
    "RunOutcome",
    "ValidationError",
    "age_profile",
    "basin_boundary",
    "clear",
    "complementary_peaks",
    "derived_param",
    "hamming",
    "is_winner",
    "mutate",
    "niche_report",
    "potential",
    "random_bitstring",
    "run",
    "step",
    "twomax",
]

__version__ = "0.1.0"
