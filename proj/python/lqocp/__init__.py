"""Sparse L^q optimal control with piecewise constant controls."""

from ._core import (
    InvalidInput,
    NumericalError,
    RegParams,
    critical_root,
    eoc,
    huber,
    interp_study,
    j_func,
    penalty_density,
    scalar_dc_argmin,
    scalar_objective,
    selftest,
    soft_threshold,
    solve_square,
)

__all__ = [
    "InvalidInput",
    "NumericalError",
    "RegParams",
    "critical_root",
    "eoc",
    "huber",
    "interp_study",
    "j_func",
    "penalty_density",
    "scalar_dc_argmin",
    "scalar_objective",
    "selftest",
    "soft_threshold",
    "solve_square",
]
