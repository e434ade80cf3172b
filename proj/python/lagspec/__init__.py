"""Spectra of lag-k sample auto-covariance matrices."""

from ._lagspec import (
    DomainError,
    NumericError,
    build_autocov,
    build_circular,
    eigenvalues,
    empirical_resolvent_trace,
    g,
    g_inverse,
    hermitize,
    linearization,
    radial_cdf,
    radial_ks,
    radial_quantile,
    sample_entry_matrix,
    sample_limit_law,
    singular_values,
    solve_s,
    support_radius,
)

__all__ = [
    "DomainError",
    "NumericError",
    "build_autocov",
    "build_circular",
    "eigenvalues",
    "empirical_resolvent_trace",
    "g",
    "g_inverse",
    "hermitize",
    "linearization",
    "radial_cdf",
    "radial_ks",
    "radial_quantile",
    "sample_entry_matrix",
    "sample_limit_law",
    "singular_values",
    "solve_s",
    "support_radius",
]
