"""Tumour growth under oncolytic virotherapy: ODE and PDE solvers with continuation."""

from ._core import (
    ConfigError,
    ModelParams,
    NumericError,
    beta_star,
    calibrate,
    coexistence,
    continue_branch,
    eigenvalues,
    hopf_curve,
    integrate,
    jacobian,
    list_scenarios,
    rhs,
    run_pde,
    run_scenario,
)

__all__ = [
    "ConfigError",
    "ModelParams",
    "NumericError",
    "beta_star",
    "calibrate",
    "coexistence",
    "continue_branch",
    "eigenvalues",
    "hopf_curve",
    "integrate",
    "jacobian",
    "list_scenarios",
    "rhs",
    "run_pde",
    "run_scenario",
]
