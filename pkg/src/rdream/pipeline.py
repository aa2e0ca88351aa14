"""Method dispatch shared by the CLI, the Monte Carlo engine and the
sensitivity-curve probe."""

from __future__ import annotations

from typing import Iterable, Optional

import numpy as np

from .baselines import GWZ, WQ, gwz_statistic, wq_statistic
from .data import Dataset, LinkSpec, linear_link
from .ranks import centered_rank_transform
from .robust import HuberConfig, fit_null_model
from .sdr import DEE, OPG, run_sdr
from .statistic import DEFAULT_LEVELS, TestReport, rdream_test

METHODS = (OPG, DEE, WQ, GWZ)


def _check_method(method):
    method = method.lower()
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    return method


def evaluate_methods(
    d: Dataset,
    methods: Iterable[str],
    link: Optional[LinkSpec] = None,
    cfg: HuberConfig = HuberConfig(),
    h: Optional[float] = None,
    q_hat: Optional[int] = None,
    gwz_sdr: str = DEE,
    levels=DEFAULT_LEVELS,
) -> dict:
    """Run several tests on one dataset, sharing the robust fit and any SDR
    result between them."""
    methods = [_check_method(m) for m in methods]
    link = link or linear_link()
    fit = fit_null_model(d, link, cfg)
    sdr_cache = {}

    def sdr_for(name):
        if name not in sdr_cache:
            sdr_cache[name] = run_sdr(d, name, q_override=q_hat)
        return sdr_cache[name]

    out = {}
    for m in methods:
        if m in (OPG, DEE):
            out[m] = rdream_test(d, link, m, h=h, cfg=cfg, levels=levels, fit=fit, sdr=sdr_for(m))
        elif m == WQ:
            scores = centered_rank_transform(fit.residuals)
            out[m] = wq_statistic(scores, d.x, h=h, fit=fit.summary(), levels=levels)
        else:
            out[m] = gwz_statistic(fit, sdr_for(gwz_sdr), d.x, h=h, levels=levels)
    return out


def run_test(d: Dataset, method: str, link: Optional[LinkSpec] = None, **kwargs) -> TestReport:
    method = _check_method(method)
    return evaluate_methods(d, [method], link, **kwargs)[method]


def sensitivity_curve(
    d: Dataset,
    method: str,
    index: int,
    y_grid,
    link: Optional[LinkSpec] = None,
    quantity: str = "statistic",
    **kwargs,
) -> np.ndarray:
    """Test output as ``y[index]`` sweeps over ``y_grid``.

    ``quantity="statistic"`` traces the adjusted, standardized statistic
    (NaN where the variance estimate is degenerate); ``"functional"`` traces
    the raw double sum ``V_n`` (rank scores) or ``T_n`` (GWZ, raw residuals),
    the quantity whose influence function governs robustness.
    """
    if quantity not in ("statistic", "functional"):
        raise ValueError(f"unknown quantity {quantity!r}")
    y_grid = np.asarray(y_grid, dtype=float)
    if not np.all(np.isfinite(y_grid)):
        raise ValueError("y_grid must be finite")
    out = np.empty(y_grid.size)
    y = np.array(d.y)
    for k, y0 in enumerate(y_grid):
        y[index] = y0
        rep = run_test(d.with_response(y), method, link, **kwargs)
        if quantity == "functional":
            out[k] = rep.v_n
        else:
            out[k] = np.nan if rep.s_n_adj is None else rep.s_n_adj
    return out
