"""Gaussian, Student-t and Cauchy dependency models.

All three are built the same way: a standard (identity-scale) chain in
the order (j, w_1, ..., w_{d-1}), then a linear lift by the Cholesky
factor of Sigma taken in that same order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import univariate as uv
from .core import DependencyModel, DmSpec, default_perm, linear_lift
from .errors import InvalidParams
from .numerics import CovarianceMatrix, as_covariance


@dataclass(frozen=True)
class EllipticalParams:
    mu: np.ndarray
    sigma: CovarianceMatrix
    nu: float | None = None

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1)
        sigma = as_covariance(self.sigma)
        if mu.shape != (sigma.dim,):
            raise InvalidParams(f"mu has length {mu.size}, sigma is {sigma.dim}x{sigma.dim}")
        if self.nu is not None and not (np.isfinite(self.nu) and self.nu > 0):
            raise InvalidParams(f"degrees of freedom must be > 0, got {self.nu}")
        mu.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def d(self) -> int:
        return self.sigma.dim


def _prepare(mu, sigma, pivot, perm, nu=None):
    params = EllipticalParams(mu if mu is not None else np.zeros(as_covariance(sigma).dim), sigma, nu)
    perm = tuple(perm) if perm is not None else default_perm(params.d, pivot)
    order = (pivot,) + perm
    L = params.sigma.ordered(order).chol
    return params, perm, order, L


def gaussian_dm(mu, sigma, pivot: int = 0, perm=None) -> DependencyModel:
    """N(mu, Sigma): latents Z_{w_i} ~ N(mu_{w_i}, Sigma_{w_i w_i}), standardized then mixed by L."""
    params, perm, order, L = _prepare(mu, sigma, pivot, perm)
    spec = DmSpec("gaussian", {"mu": params.mu, "sigma": params.sigma.entries}, pivot, perm)
    mu_o = params.mu[list(order)]
    sd_o = np.sqrt(np.diag(params.sigma.entries)[list(order)])
    coef = L[1:] / sd_o  # column k scales the standardized input k

    def r(x_j, z):
        inputs = np.column_stack([x_j, z]) - mu_o
        return inputs @ coef.T + mu_o[1:]

    latents = tuple(uv.normal(mu_o[k], sd_o[k] ** 2) for k in range(1, params.d))
    return DependencyModel(spec, uv.normal(mu_o[0], sd_o[0] ** 2), latents, r)


def _standard_t_chain(nu: float, d: int):
    """Identity-scale t chain; scale of output k is the nested square-root product of the earlier terms."""
    i = np.arange(1, d)

    def r(x_j, z):
        out = np.empty_like(z)
        num = nu + x_j * x_j
        den = np.ones_like(x_j)
        for k in range(d - 1):
            den = den * (nu + i[k])
            out[:, k] = np.sqrt(num / den) * z[:, k]
            num = num * (nu + i[k] + z[:, k] ** 2)
        return out

    return r


def student_t_dm(nu, mu, sigma, pivot: int = 0, perm=None) -> DependencyModel:
    """t_d(nu, mu, Sigma): latents Z_{w_i} ~ t(nu + i) for i = 1..d-1."""
    params, perm, order, L = _prepare(mu, sigma, pivot, perm, nu=float(nu))
    d = params.d
    spec = DmSpec(
        "student_t", {"nu": params.nu, "mu": params.mu, "sigma": params.sigma.entries}, pivot, perm
    )
    latents = tuple(uv.student_t(params.nu + k) for k in range(1, d))
    standard = DependencyModel(spec, uv.student_t(params.nu), latents, _standard_t_chain(params.nu, d))
    return linear_lift(standard, L, params.mu[list(order)], spec=spec)


def _standard_cauchy_chain(d: int):
    """h_1^2 = 1 + x_j^2, h_{k+1}^2 = h_k^2 + x_{w_k}^2, x_{w_k} = h_k z_k / sqrt(k+1)."""

    def r(x_j, z):
        out = np.empty_like(z)
        h2 = 1.0 + x_j * x_j
        for k in range(d - 1):
            out[:, k] = np.sqrt(h2 / (k + 2)) * z[:, k]
            h2 = h2 + out[:, k] ** 2
        return out

    return r


def cauchy_dm(mu, sigma, pivot: int = 0, perm=None) -> DependencyModel:
    """C_d(mu, Sigma): latents Z_{w_i} ~ t(1 + i); sum-of-squares scale recursion."""
    params, perm, order, L = _prepare(mu, sigma, pivot, perm)
    d = params.d
    spec = DmSpec("cauchy", {"mu": params.mu, "sigma": params.sigma.entries}, pivot, perm)
    latents = tuple(uv.student_t(1.0 + k) for k in range(1, d))
    standard = DependencyModel(spec, uv.cauchy(), latents, _standard_cauchy_chain(d))
    return linear_lift(standard, L, params.mu[list(order)], spec=spec)
