"""Huber M-estimation of the null regression model."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import LINEAR, Dataset, FittedModel, LinkSpec, linear_link
from .errors import GradientUnavailable, NonConvergenceWarning, RankDeficientDesign

MAD_CONSISTENCY = 1.4826
MAX_HALVINGS = 30
_INDEX_MULTIPLIERS = (0.25, 0.5, 1.0, 2.0, 4.0, -0.25, -0.5, -1.0, -2.0, -4.0)


@dataclass(frozen=True)
class HuberConfig:
    tuning_k: float = 1.345
    max_iter: int = 500
    tol: float = 1e-8

    def __post_init__(self):
        if not self.tuning_k > 0:
            raise ValueError("tuning_k must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


def mad_scale(r, floor):
    """1.4826 * MAD, never below ``floor``."""
    s = MAD_CONSISTENCY * np.median(np.abs(r - np.median(r)))
    return max(s, floor)


def _scale_floor(y):
    return 1e-12 * (1.0 + np.max(np.abs(y)))


def huber_weights(r, s, k):
    a = np.abs(r)
    w = np.ones_like(a)
    big = a > k * s
    w[big] = k * s / a[big]
    return w


def huber_objective(r, s, k):
    t = np.abs(r) / s
    return float(np.sum(np.where(t <= k, 0.5 * t * t, k * t - 0.5 * k * k)))


def _weighted_solve(design, y, w):
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(design * sw[:, None], y * sw, rcond=None)
    return coef


def _rel_change(delta, ref):
    return np.linalg.norm(delta) / max(np.linalg.norm(ref), 1e-8)


def fit_m_linear(d: Dataset, cfg: HuberConfig = HuberConfig()) -> FittedModel:
    """Huber regression of ``y`` on ``x`` with an intercept, by IRLS.

    The scale is 1.4826 * MAD of the current residuals, re-estimated at
    every iteration. Starts from ordinary least squares.
    """
    y = d.y
    design = np.column_stack([np.ones(d.n), d.x])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise RankDeficientDesign(
            f"design [1, x] has rank {np.linalg.matrix_rank(design)} < {design.shape[1]}"
        )
    floor = _scale_floor(y)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    converged = False
    it = 0
    s = floor
    for it in range(1, cfg.max_iter + 1):
        r = y - design @ coef
        s = mad_scale(r, floor)
        w = huber_weights(r, s, cfg.tuning_k)
        new = _weighted_solve(design, y, w)
        change = _rel_change(new - coef, new)
        coef = new
        if change < cfg.tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"IRLS did not converge in {cfg.max_iter} iterations", NonConvergenceWarning, stacklevel=2
        )
    resid = y - design @ coef
    return FittedModel(
        beta=coef[1:].copy(),
        theta=np.empty(0),
        intercept=float(coef[0]),
        link=linear_link(),
        residuals=resid,
        converged=converged,
        iterations=it,
        scale=float(s),
    )


def _residuals(y, x, link, alpha, p):
    beta, theta, c = alpha[:p], alpha[p:-1], alpha[-1]
    return y - c - link(x @ beta, theta)


def _default_init(d: Dataset, link: LinkSpec, cfg: HuberConfig):
    lin = fit_m_linear(d, cfg)
    beta = lin.beta / np.linalg.norm(lin.beta) if np.any(lin.beta) else np.eye(d.p)[0]
    theta = np.asarray(link.theta_start, dtype=float)
    if theta.size != link.d:
        theta = np.zeros(link.d)
    # one common scale for every candidate; a per-candidate MAD would make
    # the objective scale-free and favour wide, poor fits
    s0 = mad_scale(d.y, _scale_floor(d.y))
    best, best_obj = None, np.inf
    for m in _INDEX_MULTIPLIERS:
        g = link(d.x @ (m * beta), theta)
        if not np.all(np.isfinite(g)):
            continue
        r = d.y - g
        r = r - np.median(r)
        obj = huber_objective(r, s0, cfg.tuning_k)
        if obj < best_obj:
            best, best_obj = m, obj
    if best is None:
        best = 1.0
    return np.concatenate([best * beta, theta])


def fit_m_single_index(
    d: Dataset,
    link: LinkSpec,
    init=None,
    cfg: HuberConfig = HuberConfig(),
) -> FittedModel:
    """Huber fit of ``y = c + g(beta . x, theta) + e`` by damped Gauss-Newton.

    Each iteration solves the weighted linearised problem with Huber IRLS
    weights, then halves the step until the Huber objective decreases.
    ``init`` is ``(beta, theta)`` of length ``p + d``; when omitted a warm
    start is built from the linear fit. Links that can absorb the index
    scale have ``beta`` normalised to unit length with its first nonzero
    coordinate positive.
    """
    p = d.p
    y, x = d.y, d.x
    if init is None:
        init = _default_init(d, link, cfg)
    init = np.asarray(init, dtype=float).ravel()
    if init.size != p + link.d:
        raise ValueError(f"init must have length p + d = {p + link.d}, got {init.size}")
    r0 = y - link(x @ init[:p], init[p:])
    alpha = np.concatenate([init, [np.median(r0)]])
    floor = _scale_floor(y)
    k = cfg.tuning_k
    converged = False
    it = 0
    s = floor
    for it in range(1, cfg.max_iter + 1):
        r = _residuals(y, x, link, alpha, p)
        s = mad_scale(r, floor)
        w = huber_weights(r, s, k)
        du, dtheta = link.gradient(x @ alpha[:p], alpha[p:-1])
        jac = np.column_stack([du[:, None] * x, dtheta, np.ones(d.n)])
        if not np.all(np.isfinite(jac)):
            raise GradientUnavailable("link gradient is not finite at the current iterate")
        step = _weighted_solve(jac, r, w)
        obj0 = huber_objective(r, s, k)
        t = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS + 1):
            trial = alpha + t * step
            rt = _residuals(y, x, link, trial, p)
            if np.all(np.isfinite(rt)) and huber_objective(rt, s, k) < obj0:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # no descent direction left: numerically stationary
            converged = True
            break
        change = _rel_change(t * step, trial)
        alpha = trial
        if change < cfg.tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"Gauss-Newton did not converge in {cfg.max_iter} iterations",
            NonConvergenceWarning,
            stacklevel=2,
        )
    beta, theta, c = alpha[:p].copy(), alpha[p:-1].copy(), float(alpha[-1])
    if link.absorbs_scale and np.any(beta):
        lead = beta[np.flatnonzero(beta)[0]]
        norm = np.linalg.norm(beta) * np.sign(lead)
        beta = beta / norm
        theta = np.asarray(link.rescale(theta, norm), dtype=float)
    resid = y - c - link(x @ beta, theta)
    return FittedModel(
        beta=beta,
        theta=theta,
        intercept=c,
        link=link,
        residuals=resid,
        converged=converged,
        iterations=it,
        scale=float(s),
    )


def fit_null_model(d: Dataset, link: LinkSpec, cfg: HuberConfig = HuberConfig()) -> FittedModel:
    """Dispatch on the link kind: IRLS for linear links, Gauss-Newton otherwise."""
    if link.kind == LINEAR:
        return fit_m_linear(d, cfg)
    return fit_m_single_index(d, link, None, cfg)
