"""Transferability estimation for pre-trained models from extracted features."""

from ._core import (
    TransRateError,
    coding_rate,
    conditional_coding_rate,
    gen_blobs,
    hscore,
    histogram_mi,
    kendall_tau,
    leep,
    lfc,
    logme,
    nce,
    pearson,
    read_features,
    transrate,
    weighted_tau,
    write_features,
)

__all__ = [
    "TransRateError",
    "coding_rate",
    "conditional_coding_rate",
    "gen_blobs",
    "hscore",
    "histogram_mi",
    "kendall_tau",
    "leep",
    "lfc",
    "logme",
    "nce",
    "pearson",
    "read_features",
    "transrate",
    "weighted_tau",
    "write_features",
]
