"""Robust dimension-reduction model-adaptive lack-of-fit tests for
parametric single-index regression models."""

from ._accel import backend, set_backend
from .baselines import gwz_statistic, wq_statistic
from .data import (
    Dataset,
    FittedModel,
    LinkSpec,
    StandardizationInfo,
    exponential_link,
    fixed_link,
    linear_link,
    standardize_covariates,
    validate_dataset,
)
from .pipeline import evaluate_methods, run_test, sensitivity_curve
from .ranks import RankScores, centered_rank_transform
from .robust import HuberConfig, fit_m_linear, fit_m_single_index
from .sdr import SdrResult, dee_sir_matrix, estimate_b, opg_matrix, rre_select_q, run_sdr, subspace_distance
from .smoothing import BandwidthRule, bandwidth, pairwise_weights, product_kernel, quartic_kernel
from .statistic import TestReport, rdream_test, size_adjusted, sn_statistic, var_estimate, vn_statistic

__version__ = "0.1.0"
