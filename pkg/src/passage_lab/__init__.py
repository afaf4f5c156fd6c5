"""Successive passage times of Brownian motion through a straight line."""

__version__ = "0.1.0"

from .linear import (
    DefectiveLaw,
    PassageProblem,
    first_passage_cdf,
    first_passage_density,
    first_passage_mean,
    hit_probability,
    last_passage_cdf,
    last_passage_density,
    never_return_probability,
    no_zero_probability,
    salminen_density_numeric,
)
from .numerics import ConvergenceError, QuadResult, QuadSpec, integrate
from .successive import (
    DensityGrid,
    NthPassageLaw,
    jensen_bound,
    nth_passage_law,
    t2_cdf,
    t2_defect,
    t2_density,
    tau2_density,
    tn_cdf,
)
