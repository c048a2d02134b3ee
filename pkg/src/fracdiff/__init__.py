"""Closed-form kernels, solvers and numerical oracles for space-time fractional diffusion."""

from .kernels import (
    KernelEval,
    KernelSpec,
    evaluate,
    fundamental_solution,
    green_g1,
    green_g2,
    small_x_behavior,
    tail_exponent,
)
from .moments import MomentQuery, moment_formula, moment_quadrature
from .solver import SampledField, SolveConfig, SourceTerm, solve
from .special_fn import MLParams, mittag_leffler, rgamma

__version__ = "0.1.0"

__all__ = [
    "KernelEval",
    "KernelSpec",
    "evaluate",
    "fundamental_solution",
    "green_g1",
    "green_g2",
    "small_x_behavior",
    "tail_exponent",
    "MomentQuery",
    "moment_formula",
    "moment_quadrature",
    "SampledField",
    "SolveConfig",
    "SourceTerm",
    "solve",
    "MLParams",
    "mittag_leffler",
    "rgamma",
]
