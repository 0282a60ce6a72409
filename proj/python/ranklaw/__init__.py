"""Rank-size analysis: rank correlations, rank-size law fits, two-regime
scatter splits and preferential-attachment urn simulation."""

from ._core import (
    DataError,
    InvalidArgument,
    NumericError,
    RanklawError,
    beta,
    correlate,
    describe,
    fit,
    incomplete_beta,
    kendall_counts,
    kendall_tau,
    main,
    model_eval,
    simulate_urns,
    two_line_split,
    yule_simon_pmf,
    z_score,
)

__all__ = [
    "DataError",
    "InvalidArgument",
    "NumericError",
    "RanklawError",
    "beta",
    "correlate",
    "describe",
    "fit",
    "incomplete_beta",
    "kendall_counts",
    "kendall_tau",
    "main",
    "model_eval",
    "simulate_urns",
    "two_line_split",
    "yule_simon_pmf",
    "z_score",
]
