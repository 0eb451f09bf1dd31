"""Marginal log-linear models, mixed parametrization and mediation effects."""

from ._core import (
    NumericalError,
    SpecificationError,
    build_G,
    build_H,
    count_dof,
    cov_block,
    fit,
    marginalize,
    mean_params,
    mediate,
    mll_vector,
    natural_effects,
    p_from_theta,
    simulate,
    spec_variables,
    theta_from_p,
    verify,
)

__all__ = [
    "NumericalError",
    "SpecificationError",
    "build_G",
    "build_H",
    "count_dof",
    "cov_block",
    "fit",
    "marginalize",
    "mean_params",
    "mediate",
    "mll_vector",
    "natural_effects",
    "p_from_theta",
    "simulate",
    "spec_variables",
    "theta_from_p",
    "verify",
]
