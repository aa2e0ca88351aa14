"""Sufficient dimension reduction: OPG and DEE candidate matrices, RRE
selection of the structural dimension, and eigenvector extraction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .data import Dataset, covariance_inverse_sqrt
from .errors import EigenFailure, InputError, SingularLocalFit

OPG = "opg"
DEE = "dee"
OPG_PILOT_CONSTANT = 2.34
# 2.34 is calibrated for a Gaussian kernel; sqrt(7) matches the quartic
# kernel to unit standard deviation.
OPG_PILOT_SCALE = 7 ** 0.5
OPG_RIDGE = 1e-8
OPG_INFLATE_FACTOR = 1.5
OPG_MAX_INFLATIONS = 4


@dataclass(frozen=True)
class SdrResult:
    method: str
    candidate: np.ndarray
    eigenvalues: np.ndarray
    q_hat: int
    b_hat: np.ndarray
    ridge: float
    h_ref: float
    details: dict = field(default_factory=dict)


def opg_pilot_bandwidth(n, p):
    return OPG_PILOT_SCALE * OPG_PILOT_CONSTANT * n ** (-1.0 / (p + 6))


def _opg(d: Dataset, h0=None):
    n, p = d.x.shape
    if n <= p + 1:
        raise InputError(f"OPG needs n > p + 1 (n={n}, p={p})")
    if h0 is None:
        h0 = opg_pilot_bandwidth(n, p)
    if not h0 > 0:
        raise InputError(f"pilot bandwidth must be positive, got {h0}")
    info = covariance_inverse_sqrt(d.x)
    xs = info.apply(d.x)
    grads, inflated, failed, support = _kernels.opg_gradients(
        d.x, xs, d.y, h0, OPG_RIDGE, p + 2, OPG_INFLATE_FACTOR, OPG_MAX_INFLATIONS
    )
    if failed >= 0:
        raise SingularLocalFit(failed, support)
    sigma = grads.T @ grads / n
    sigma = 0.5 * (sigma + sigma.T)
    return sigma, {"pilot_bandwidth": float(h0), "inflated_anchors": inflated}


def opg_matrix(d: Dataset, h0=None) -> np.ndarray:
    """Average outer product of local linear gradient estimates.

    Local weights use the product quartic kernel on standardized covariates
    with pilot bandwidth ``h0`` (default ``sqrt(7) 2.34 n^(-1/(p+6))``); anchors with
    fewer than ``p + 2`` supporting points have their bandwidth inflated.
    """
    return _opg(d, h0)[0]


def dee_sir_matrix(d: Dataset) -> np.ndarray:
    """Average over ``t = y_j`` of the two-slice SIR matrix for ``I(y <= t)``.

    Computed on standardized covariates and mapped back as ``A M A`` with
    ``A`` the inverse square root of the sample covariance.
    """
    n = d.n
    if n < 10:
        raise InputError(f"DEE needs n >= 10, got {n}")
    info = covariance_inverse_sqrt(d.x)
    z = info.apply(d.x)
    order = np.argsort(d.y, kind="stable")
    ys = d.y[order]
    partial = np.cumsum(z[order], axis=0) / n
    counts = np.searchsorted(ys, d.y, side="right")
    p1 = counts / n
    inner = (counts > 0) & (counts < n)
    s = partial[counts[inner] - 1]
    f = 1.0 / p1[inner] + 1.0 / (1.0 - p1[inner])
    m = (s * f[:, None]).T @ s / n
    a = info.cov_inv_sqrt
    m = a @ m @ a
    return 0.5 * (m + m.T)


def rre_select_q(eigenvalues, n, h_ref=None) -> int:
    """Ridge-ratio estimate: argmin over k of ``(l[k+1] + c) / (l[k] + c)``.

    ``c = 1 / sqrt(n h_ref)`` with ``h_ref`` defaulting to ``n^(-1/5)``.
    Ties go to the smallest k.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size < 2:
        raise InputError("RRE needs at least two eigenvalues")
    if h_ref is None:
        h_ref = n ** (-0.2)
    c = 1.0 / np.sqrt(n * h_ref)
    ratios = (lam[1:] + c) / (lam[:-1] + c)
    return int(np.argmin(ratios)) + 1


def estimate_b(candidate, q_hat) -> np.ndarray:
    """Unit eigenvectors of the ``q_hat`` largest eigenvalues, each signed so
    its largest-magnitude entry is positive."""
    candidate = np.asarray(candidate, dtype=float)
    try:
        _, vecs = np.linalg.eigh(candidate)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    b = vecs[:, ::-1][:, :q_hat].copy()
    lead = b[np.argmax(np.abs(b), axis=0), np.arange(q_hat)]
    b *= np.where(lead < 0, -1.0, 1.0)
    return b


def subspace_distance(b1, b2) -> float:
    """Frobenius distance of column-space projectors, scaled into [0, 1]."""
    b1 = np.asarray(b1, dtype=float)
    b2 = np.asarray(b2, dtype=float)
    if b1.ndim == 1:
        b1 = b1[:, None]
    if b2.ndim == 1:
        b2 = b2[:, None]
    if b1.shape[0] != b2.shape[0]:
        raise InputError("matrices must have the same number of rows")
    p1 = b1 @ b1.T
    p2 = b2 @ b2.T
    q = max(b1.shape[1], b2.shape[1])
    return float(np.linalg.norm(p1 - p2) / np.sqrt(2 * q))


def orthonormalize(b):
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    qmat, _ = np.linalg.qr(b)
    return qmat


def run_sdr(d: Dataset, method: str, h_ref=None, h0=None, q_override=None) -> SdrResult:
    method = method.lower()
    details = {}
    if method == OPG:
        candidate, details = _opg(d, h0)
    elif method == DEE:
        candidate = dee_sir_matrix(d)
    else:
        raise InputError(f"unknown SDR method {method!r}")
    if h_ref is None:
        h_ref = d.n ** (-0.2)
    try:
        lam = np.linalg.eigvalsh(candidate)[::-1]
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    lam = np.clip(lam, 0.0, None)
    if q_override is not None:
        q_hat = int(q_override)
        if not 1 <= q_hat <= d.p:
            raise InputError(f"q override must be in [1, {d.p}], got {q_hat}")
    elif d.p == 1:
        q_hat = 1
    else:
        q_hat = rre_select_q(lam, d.n, h_ref)
    return SdrResult(
        method=method,
        candidate=candidate,
        eigenvalues=lam,
        q_hat=q_hat,
        b_hat=estimate_b(candidate, q_hat),
        ridge=float(1.0 / np.sqrt(d.n * h_ref)),
        h_ref=float(h_ref),
        details=details,
    )
