"""Transferability estimation by coding rate, plus baseline scorers and rank metrics."""
from ._backend import BACKEND
from .coding import (
    Labels,
    ScoreConfig,
    TransferScore,
    bin_regression_labels,
    class_coding_rates,
    coding_rate,
    conditional_coding_rate,
    label_entropy,
    transrate,
)
from .matcore import gram, logdet_ipd, singular_values, unit_normalize_rows
from .rankeval import kendall_tau, pearson, rank_models, weighted_tau

__version__ = "0.1.0"
