"""Quartic kernel, bandwidth rules and pairwise kernel weights."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels
from .errors import DegenerateBandwidth

OPG_CONSTANT = 1.8
DEE_CONSTANT = 0.5
# integral of K(u)^2 over [-1, 1]
QUARTIC_ROUGHNESS = 5.0 / 7.0


def quartic_kernel(u):
    """``15/16 (1 - u^2)^2`` on ``|u| <= 1`` and 0 outside; works elementwise."""
    out = _kernels.quartic(u)
    return float(out) if np.ndim(out) == 0 else out


def product_kernel(u):
    """Product of univariate quartics over the last axis of ``u``."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 0:
        u = u[None]
    out = np.prod(_kernels.quartic(u), axis=-1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class BandwidthRule:
    """``constant * n^(-1/(dim + 4))``, or a fixed ``h`` when ``fixed`` is set."""

    method: str
    constant: float = float("nan")
    fixed: Optional[float] = None

    @classmethod
    def opg(cls):
        return cls("opg", OPG_CONSTANT)

    @classmethod
    def dee(cls):
        return cls("dee", DEE_CONSTANT)

    @classmethod
    def of_fixed(cls, h):
        if not h > 0:
            raise DegenerateBandwidth(f"bandwidth must be positive, got {h}")
        return cls("fixed", fixed=float(h))

    @classmethod
    def for_method(cls, method):
        method = method.lower()
        if method == "opg":
            return cls.opg()
        if method in ("dee", "wq"):
            return cls.dee()
        raise ValueError(f"no bandwidth rule for method {method!r}")


def bandwidth(rule: BandwidthRule, n: int, q_hat: int) -> float:
    if rule.fixed is not None:
        return rule.fixed
    return rule.constant * n ** (-1.0 / (q_hat + 4))


def _as_matrix(z):
    z = np.asarray(z, dtype=float)
    return z[:, None] if z.ndim == 1 else z


def pairwise_weights(z, h):
    """Dense symmetric matrix ``W[i, j] = h^-q K((z_i - z_j)/h)``, zero diagonal."""
    if not h > 0:
        raise DegenerateBandwidth(f"bandwidth must be positive, got {h}")
    return _kernels.weight_matrix(_as_matrix(z), float(h))


def kernel_pair_sums(z, h, u, v=None):
    """Fused double sums used by the test statistics (see ``_kernels.pair_sums``)."""
    if not h > 0:
        raise DegenerateBandwidth(f"bandwidth must be positive, got {h}")
    z = _as_matrix(z)
    if v is None:
        v = np.ones(z.shape[0])
    return _kernels.pair_sums(z, float(h), u, v)
