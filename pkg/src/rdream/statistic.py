"""The RDREAM statistic chain and its chi-square(1) calibration."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from .data import Dataset, FittedModel, LinkSpec, linear_link
from .errors import DegenerateVariance
from .ranks import RankScores, centered_rank_transform
from .robust import HuberConfig, fit_null_model
from .sdr import SdrResult, orthonormalize, run_sdr
from .smoothing import BandwidthRule, bandwidth, kernel_pair_sums

log = logging.getLogger(__name__)

DEFAULT_LEVELS = (0.01, 0.05, 0.10)
# 2 * (1/12)^2: twice the squared variance of a uniform(-1/2, 1/2) score
RANK_VARIANCE_DIVISOR = 72.0


def chi2_sf(x, df=1):
    """Upper tail of chi-square, via the regularized upper incomplete gamma."""
    return special.gammaincc(0.5 * df, 0.5 * np.asarray(x, dtype=float))


def chi2_cdf(x, df=1):
    return special.gammainc(0.5 * df, 0.5 * np.asarray(x, dtype=float))


def chi2_quantile(prob, df=1):
    return 2.0 * special.gammaincinv(0.5 * df, prob)


def size_factor(n):
    return 1.0 + 4.0 * n ** (-0.8)


@dataclass
class TestReport:
    """Result of one lack-of-fit test; ``p_value`` is None when the variance
    estimate is degenerate."""

    method: str
    n: int
    v_n: float
    var_hat: float
    s_n: Optional[float]
    s_n_adj: Optional[float]
    p_value: Optional[float]
    q_hat: int
    b_hat: np.ndarray
    h: float
    reject_at: dict
    fit: dict
    diagnostic: str = ""
    extra: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    @property
    def degenerate(self):
        return self.p_value is None

    def to_record(self) -> dict:
        rec = {
            "method": self.method,
            "n": self.n,
            "v_n": self.v_n,
            "var_hat": self.var_hat,
            "s_n": self.s_n,
            "s_n_adj": self.s_n_adj,
            "p_value": self.p_value,
            "q_hat": self.q_hat,
            "h": self.h,
            "b_hat": np.asarray(self.b_hat).tolist(),
            "diagnostic": self.diagnostic,
        }
        for level, rejected in self.reject_at.items():
            rec[f"reject_{level:g}"] = rejected
        for key, value in self.fit.items():
            rec[f"fit_{key}"] = value
        for key, value in self.extra.items():
            rec[key] = value
        return rec


def vn_statistic(scores, weights) -> float:
    """``sum_{i != j} W[i, j] e_i e_j / (n (n - 1))``."""
    e = scores.scores if isinstance(scores, RankScores) else np.asarray(scores, dtype=float)
    w = np.asarray(weights, dtype=float)
    n = e.size
    total = e @ w @ e - np.sum(np.diag(w) * e * e)
    return float(total / (n * (n - 1)))


def var_estimate(z, h) -> float:
    """Plug-in null variance ``sum_{i != j} h^-q K^2((z_i - z_j)/h) / (72 n (n-1))``."""
    z = np.asarray(z, dtype=float)
    n = z.shape[0]
    _, s2 = kernel_pair_sums(z, h, np.zeros(n))
    if not s2 > 0:
        raise DegenerateVariance("no pair of points falls inside the kernel support")
    return float(s2 / (RANK_VARIANCE_DIVISOR * n * (n - 1)))


def sn_statistic(v_n, var_hat, n, h, dim=1) -> float:
    """``((n-1)/n) n h^(dim/2) V_n / sqrt(Var)``; ``dim=1`` is the null case."""
    return float((n - 1) / n * n * h ** (0.5 * dim) * v_n / np.sqrt(var_hat))


def size_adjusted(s_n, n) -> float:
    return float(size_factor(n) * s_n)


def p_value_of(s_adj) -> float:
    return float(chi2_sf(s_adj * s_adj))


def decisions(s_adj, levels=DEFAULT_LEVELS) -> dict:
    stat = s_adj * s_adj
    return {float(a): bool(stat >= chi2_quantile(1.0 - a)) for a in levels}


def finish_report(method, n, v_n, var_hat, h, dim, q_hat, b_hat, fit, levels, extra=None):
    """Standardize, size-adjust and calibrate a kernel statistic."""
    s_n = sn_statistic(v_n, var_hat, n, h, dim)
    s_adj = size_adjusted(s_n, n)
    return TestReport(
        method=method,
        n=n,
        v_n=float(v_n),
        var_hat=float(var_hat),
        s_n=s_n,
        s_n_adj=s_adj,
        p_value=p_value_of(s_adj),
        q_hat=int(q_hat),
        b_hat=np.asarray(b_hat),
        h=float(h),
        reject_at=decisions(s_adj, levels),
        fit=fit,
        extra=dict(extra or {}),
    )


def degenerate_report(method, n, v_n, h, q_hat, b_hat, fit, reason, extra=None):
    return TestReport(
        method=method,
        n=n,
        v_n=float(v_n),
        var_hat=0.0,
        s_n=None,
        s_n_adj=None,
        p_value=None,
        q_hat=int(q_hat),
        b_hat=np.asarray(b_hat),
        h=float(h),
        reject_at={},
        fit=fit,
        diagnostic=reason,
        extra=dict(extra or {}),
    )


def rank_statistic(scores, z, h, method, q_hat, b_hat, fit, levels=DEFAULT_LEVELS, extra=None):
    """V_n, its variance and the calibrated report for projected covariates ``z``."""
    e = scores.scores if isinstance(scores, RankScores) else np.asarray(scores, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[:, None]
    n = e.size
    s1, s2 = kernel_pair_sums(z, h, e)
    v_n = s1 / (n * (n - 1))
    if not s2 > 0:
        return degenerate_report(
            method, n, v_n, h, q_hat, b_hat, fit,
            "DegenerateVariance: no pair of points inside the kernel support", extra,
        )
    var_hat = s2 / (RANK_VARIANCE_DIVISOR * n * (n - 1))
    return finish_report(method, n, v_n, var_hat, h, z.shape[1], q_hat, b_hat, fit, levels, extra)


def rdream_test(
    d: Dataset,
    link: Optional[LinkSpec] = None,
    method: str = "opg",
    h: Optional[float] = None,
    q_hat: Optional[int] = None,
    b_hat=None,
    cfg: HuberConfig = HuberConfig(),
    levels=DEFAULT_LEVELS,
    fit: Optional[FittedModel] = None,
    sdr: Optional[SdrResult] = None,
) -> TestReport:
    """Robust dimension-reduction lack-of-fit test of ``E(Y|X) = g(beta'X, theta)``.

    Pipeline: Huber fit, centered rank scores of the residuals, OPG or DEE
    estimate of the projection (``q_hat`` by ridge ratio), bandwidth
    ``c n^(-1/(q_hat+4))`` with ``c = 1.8`` (OPG) or ``0.5`` (DEE), then the
    standardized and size-adjusted statistic with a chi-square(1) p-value
    for its square.

    ``h``, ``q_hat`` and ``b_hat`` override the data-driven choices; a
    precomputed ``fit`` or ``sdr`` is reused as given.
    """
    method = method.lower()
    link = link or linear_link()
    if fit is None:
        fit = fit_null_model(d, link, cfg)
    scores = centered_rank_transform(fit.residuals)
    extra = {}
    if b_hat is not None:
        b = orthonormalize(b_hat)
        q = b.shape[1]
    else:
        if sdr is None:
            sdr = run_sdr(d, method, q_override=q_hat)
        b, q = sdr.b_hat, sdr.q_hat
        extra.update(sdr_ridge=sdr.ridge, sdr_h_ref=sdr.h_ref)
        extra.update(sdr.details)
    if q > 3:
        log.warning("estimated structural dimension %d > 3; kernel test may be unreliable", q)
    if h is None:
        h = bandwidth(BandwidthRule.for_method(method), d.n, q)
        extra["h_rule"] = method
    else:
        extra["h_rule"] = "fixed"
    return rank_statistic(scores, d.x @ b, h, method, q, b, fit.summary(), levels, extra)
