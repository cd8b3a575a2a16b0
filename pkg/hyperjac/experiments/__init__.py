"""Counterexample sweeps, the radial identity and the randomized identity suites."""

from .families import FAMILIES, FamilyConfig, Sample, build_sample, check_lacunarity, lacunary_frequencies
from .lemma410 import RadialIdentity, radial_integral_lemma410, sphere_area, wallis
from .rates import RateFit, fit_rate
from .report import RateExperiment, dumps, write_report
from .runner import family_row, run_family
from .suite import SUITES, run_lemma_suite

__all__ = [
    "FAMILIES",
    "FamilyConfig",
    "Sample",
    "build_sample",
    "check_lacunarity",
    "lacunary_frequencies",
    "RadialIdentity",
    "radial_integral_lemma410",
    "sphere_area",
    "wallis",
    "RateFit",
    "fit_rate",
    "RateExperiment",
    "dumps",
    "write_report",
    "family_row",
    "run_family",
    "SUITES",
    "run_lemma_suite",
]
