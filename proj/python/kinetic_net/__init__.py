"""Moment models of linear kinetic equations on star networks."""

from ._knet import (
    Expansion,
    boundary_matrix,
    convergence,
    dissipativity,
    fit_slope,
    layer_conditions,
    moment_matrix,
    quadrature,
    simulate_network,
    structure_residuals,
    thread_cap,
)

__all__ = [
    "Expansion",
    "boundary_matrix",
    "convergence",
    "dissipativity",
    "fit_slope",
    "layer_conditions",
    "moment_matrix",
    "quadrature",
    "simulate_network",
    "structure_residuals",
    "thread_cap",
]
