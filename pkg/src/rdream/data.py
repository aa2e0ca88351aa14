"""Containers for observations, link functions and fitted null models."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    EmptyCovariates,
    NonFinite,
    ShapeMismatch,
    SingularCovariance,
    TooFewObservations,
)

EIGEN_FLOOR = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Response vector ``y`` (n,) and covariate matrix ``x`` (n, p)."""

    y: np.ndarray
    x: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def with_response(self, y) -> "Dataset":
        return validate_dataset(y, self.x)


def validate_dataset(y, x) -> Dataset:
    """Check shapes and finiteness and return an immutable :class:`Dataset`.

    A 1-D ``x`` is treated as a single covariate column.
    """
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.ndim != 1:
        raise ShapeMismatch(f"y must be 1-D, got shape {y.shape}")
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2:
        raise ShapeMismatch(f"x must be 2-D, got shape {x.shape}")
    if x.shape[0] != y.shape[0]:
        raise ShapeMismatch(
            f"y has {y.shape[0]} entries but x has {x.shape[0]} rows"
        )
    if x.shape[1] == 0:
        raise EmptyCovariates()
    bad = np.flatnonzero(~np.isfinite(y))
    if bad.size:
        raise NonFinite("y", int(bad[0]))
    bad = np.argwhere(~np.isfinite(x))
    if bad.size:
        raise NonFinite("x", tuple(int(i) for i in bad[0]))
    if y.shape[0] < 3:
        raise TooFewObservations(y.shape[0])
    return Dataset(_frozen(y), _frozen(x))


@dataclass(frozen=True)
class StandardizationInfo:
    mean: np.ndarray
    cov_inv_sqrt: np.ndarray

    def apply(self, x):
        return (np.asarray(x, dtype=float) - self.mean) @ self.cov_inv_sqrt

    def invert(self, z):
        return np.asarray(z, dtype=float) @ np.linalg.inv(self.cov_inv_sqrt) + self.mean


def covariance_inverse_sqrt(x) -> StandardizationInfo:
    """Mean and symmetric inverse square root of the sample covariance (ddof=1)."""
    x = np.asarray(x, dtype=float)
    mean = x.mean(axis=0)
    cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    evals, evecs = np.linalg.eigh(cov)
    largest = evals[-1]
    if largest <= 0 or evals[0] <= EIGEN_FLOOR * largest:
        raise SingularCovariance(float(evals[0]), float(largest))
    inv_sqrt = (evecs / np.sqrt(evals)) @ evecs.T
    inv_sqrt = 0.5 * (inv_sqrt + inv_sqrt.T)
    return StandardizationInfo(_frozen(mean), _frozen(inv_sqrt))


def standardize_covariates(d: Dataset) -> tuple[Dataset, StandardizationInfo]:
    """Whiten ``x`` to zero mean and identity sample covariance."""
    info = covariance_inverse_sqrt(d.x)
    return Dataset(d.y, _frozen(info.apply(d.x))), info


# -- link functions ---------------------------------------------------------

LINEAR = "linear"
SINGLE_INDEX = "single_index"


@dataclass(frozen=True)
class LinkSpec:
    """Known link ``g(index, theta)`` of the null model.

    ``g(u, theta)`` is evaluated on a vector of indices. ``grad(u, theta)``
    returns ``(dg/du, dg/dtheta)`` with shapes (n,) and (n, d); when omitted
    central differences are used. ``rescale(theta, c)`` returns ``theta'``
    such that ``g(u, theta') == g(c * u, theta)``; links that provide it have
    their direction normalised to unit length after fitting.
    """

    kind: str
    g: Callable[[np.ndarray, np.ndarray], np.ndarray]
    d: int = 0
    grad: Optional[Callable] = None
    theta_start: tuple = ()
    rescale: Optional[Callable[[np.ndarray, float], np.ndarray]] = None
    name: str = ""

    @property
    def absorbs_scale(self) -> bool:
        return self.rescale is not None

    def __call__(self, u, theta=()):
        return self.g(np.asarray(u, dtype=float), np.asarray(theta, dtype=float))

    def gradient(self, u, theta):
        u = np.asarray(u, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if self.grad is not None:
            du, dtheta = self.grad(u, theta)
            return np.asarray(du, dtype=float), np.asarray(dtheta, dtype=float).reshape(u.size, self.d)
        return _numeric_gradient(self.g, u, theta)


def _numeric_gradient(g, u, theta):
    eps = np.cbrt(np.finfo(float).eps)
    hu = eps * np.maximum(1.0, np.abs(u))
    du = (g(u + hu, theta) - g(u - hu, theta)) / (2 * hu)
    dtheta = np.empty((u.size, theta.size))
    for k in range(theta.size):
        step = eps * max(1.0, abs(theta[k]))
        tp = theta.copy()
        tm = theta.copy()
        tp[k] += step
        tm[k] -= step
        dtheta[:, k] = (g(u, tp) - g(u, tm)) / (2 * step)
    return du, dtheta


def _linear_g(u, theta):
    return u


def _linear_grad(u, theta):
    return np.ones_like(u), np.empty((u.size, 0))


def linear_link() -> LinkSpec:
    return LinkSpec(LINEAR, _linear_g, 0, _linear_grad, name="linear")


def _exp_g(u, theta):
    return theta[0] * np.exp(theta[1] * u)


def _exp_grad(u, theta):
    e = np.exp(theta[1] * u)
    return theta[0] * theta[1] * e, np.column_stack([e, theta[0] * u * e])


def _exp_rescale(theta, c):
    return np.array([theta[0], theta[1] * c])


def exponential_link(scale=1.0, rate=1.0) -> LinkSpec:
    """``g(u) = theta0 * exp(theta1 * u)``, the null link of the H14 design."""
    return LinkSpec(
        SINGLE_INDEX, _exp_g, 2, _exp_grad, (scale, rate), _exp_rescale, name="exponential"
    )


def fixed_link(g, grad_u=None, name="fixed") -> LinkSpec:
    """A parameter-free link ``g(u)``."""

    def g2(u, theta):
        return g(u)

    grad = None
    if grad_u is not None:

        def grad(u, theta):
            return grad_u(u), np.empty((u.size, 0))

    return LinkSpec(SINGLE_INDEX, g2, 0, grad, name=name)


@dataclass(frozen=True)
class FittedModel:
    """Robust fit of ``y = intercept + g(beta . x, theta) + e``."""

    beta: np.ndarray
    theta: np.ndarray
    intercept: float
    link: LinkSpec
    residuals: np.ndarray
    converged: bool
    iterations: int
    scale: float = field(default=float("nan"))

    def predict(self, x):
        u = np.asarray(x, dtype=float) @ self.beta
        return self.intercept + self.link(u, self.theta)

    def summary(self) -> dict:
        return {
            "link": self.link.name or self.link.kind,
            "intercept": float(self.intercept),
            "beta": [float(b) for b in self.beta],
            "theta": [float(t) for t in self.theta],
            "scale": float(self.scale),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
        }
