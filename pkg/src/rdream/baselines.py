"""Comparison tests: the full-dimensional rank test (WQ) and the
dimension-reduction test on raw residuals (GWZ)."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .data import FittedModel, covariance_inverse_sqrt
from .ranks import RankScores
from .sdr import SdrResult
from .smoothing import DEE_CONSTANT, BandwidthRule, bandwidth, kernel_pair_sums
from .statistic import (
    DEFAULT_LEVELS,
    TestReport,
    decisions,
    degenerate_report,
    p_value_of,
    rank_statistic,
    size_adjusted,
)

WQ = "wq"
GWZ = "gwz"


def wq_bandwidth(n, p):
    return DEE_CONSTANT * n ** (-1.0 / (p + 4))


def wq_statistic(
    scores: RankScores,
    x,
    h: Optional[float] = None,
    fit: Optional[dict] = None,
    levels=DEFAULT_LEVELS,
    standardize: bool = True,
) -> TestReport:
    """Rank-score kernel test with a p-dimensional product kernel on the
    (standardized) covariates, normalised with ``h^(p/2)``."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n, p = x.shape
    z = covariance_inverse_sqrt(x).apply(x) if standardize and p > 1 else x
    if standardize and p == 1:
        z = (x - x.mean()) / x.std(ddof=1)
    if h is None:
        h = wq_bandwidth(n, p)
    return rank_statistic(scores, z, h, WQ, p, np.eye(p), fit or {}, levels)


def gwz_statistic(
    fit: FittedModel,
    sdr: SdrResult,
    x,
    h: Optional[float] = None,
    levels=DEFAULT_LEVELS,
) -> TestReport:
    """Kernel test on raw residuals projected onto the SDR directions.

    Standardized as ``n h^(q/2) T / sqrt(V_G)`` with the residual-moment
    variance ``V_G = 2 sum_{i != j} h^-q K^2 e_i^2 e_j^2 / (n (n-1))``.
    """
    e = np.asarray(fit.residuals, dtype=float)
    n = e.size
    q = sdr.q_hat
    if h is None:
        h = bandwidth(BandwidthRule.for_method(sdr.method), n, q)
    z = np.asarray(x, dtype=float) @ sdr.b_hat
    s1, s2 = kernel_pair_sums(z, h, e, e * e)
    t_n = s1 / (n * (n - 1))
    extra = {"sdr_method": sdr.method}
    if not s2 > 0:
        return degenerate_report(
            GWZ, n, t_n, h, q, sdr.b_hat, fit.summary(),
            "DegenerateVariance: no pair of points inside the kernel support", extra,
        )
    var_g = 2.0 * s2 / (n * (n - 1))
    s_n = float(n * h ** (0.5 * q) * t_n / np.sqrt(var_g))
    s_adj = size_adjusted(s_n, n)
    return TestReport(
        method=GWZ,
        n=n,
        v_n=float(t_n),
        var_hat=float(var_g),
        s_n=s_n,
        s_n_adj=s_adj,
        p_value=p_value_of(s_adj),
        q_hat=q,
        b_hat=sdr.b_hat,
        h=float(h),
        reject_at=decisions(s_adj, levels),
        fit=fit.summary(),
        extra=extra,
    )
