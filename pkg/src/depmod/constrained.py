"""Dependency models for independent variables under sum or quadratic constraints.

Each reference family has a generalized variant: outputs ``F_i^{-1}(G_i(y_i))``
of the reference chain, so that the constraint holds on the transformed
scale ``G_i^{-1}(F_i(x_i))``. Reference laws are Gamma(a_i, beta) for sum
constraints, N(0, sigma_i^2) for the linear Gaussian constraint and N(0, 1)
for quadratic constraints.

The trapezoid models at the end are the two-variable benchmark used by
the sensitivity tables: uniform law on {0 <= x1, x2 <= 1 : beta x1 + x2 <= 1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import univariate as uv
from .core import DependencyModel, DmSpec, default_perm, linear_lift
from .errors import InvalidParams
from .numerics import CovarianceMatrix, as_covariance

KINDS = ("sum_eq", "sum_lt", "quad_eq", "quad_lt")


# ---------------------------------------------------------------------------
# constraint and marginal containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarginalSet:
    """Target CDFs F_i paired with reference laws G_i (both per variable)."""

    marginals: tuple
    references: tuple

    def __post_init__(self):
        object.__setattr__(self, "marginals", tuple(self.marginals))
        object.__setattr__(self, "references", tuple(self.references))
        if len(self.marginals) != len(self.references) or not self.marginals:
            raise InvalidParams("need one reference law per marginal")
        for law in self.marginals:
            if law.family == "rademacher":
                raise InvalidParams("marginals must be continuous")

    @property
    def d(self) -> int:
        return len(self.marginals)

    def to_reference(self, i: int, x):
        """G_i^{-1}(F_i(x))."""
        u = uv.open_unit(uv.cdf(self.marginals[i], x))
        return uv.quantile(self.references[i], u)

    def from_reference(self, i: int, y):
        """F_i^{-1}(G_i(y))."""
        u = uv.open_unit(uv.cdf(self.references[i], y))
        return uv.quantile(self.marginals[i], u)

    def transformed_law(self, i: int, base: uv.DistributionSpec) -> uv.DistributionSpec:
        """Law of F_i^{-1}(G_i(Y)) for Y ~ base."""
        return uv.transformed(base, self.references[i], self.marginals[i])


@dataclass(frozen=True)
class ConstraintSpec:
    """g(x) = sum_i w_i t_i(x_i) (sum kinds) or sum_i w_i t_i(x_i)^2 (quad kinds), against level c.

    ``t_i`` is the identity unless a MarginalSet is given, in which case
    t_i = G_i^{-1} o F_i.
    """

    kind: str
    c: float
    weights: tuple | None = None
    transform: MarginalSet | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParams(f"constraint kind must be one of {KINDS}, got {self.kind!r}")
        if not np.isfinite(self.c):
            raise InvalidParams("constraint level must be finite")
        if self.kind.startswith("quad") and not self.c > 0:
            raise InvalidParams("quadratic constraints need c > 0")
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    @property
    def is_equality(self) -> bool:
        return self.kind.endswith("_eq")

    def evaluate(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.transform is not None:
            x = np.column_stack([self.transform.to_reference(i, x[:, i]) for i in range(x.shape[1])])
        if self.kind.startswith("quad"):
            x = x * x
        w = np.ones(x.shape[1]) if self.weights is None else np.asarray(self.weights)
        return x @ w

    def residual(self, x) -> np.ndarray:
        return self.evaluate(x) - self.c

    def satisfied(self, x, band: float = 0.0) -> np.ndarray:
        g = self.evaluate(x)
        if self.is_equality:
            return np.abs(g - self.c) <= band
        return g < self.c


def _check_positive(name, values):
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.size < 1 or not np.all(np.isfinite(arr)) or not np.all(arr > 0):
        raise InvalidParams(f"{name} must be finite and > 0")
    return arr


def _resolve(d, pivot, perm):
    perm = tuple(perm) if perm is not None else default_perm(d, pivot)
    return perm, (pivot,) + perm


def _mode(mode, allowed):
    if mode not in allowed:
        raise InvalidParams(f"mode must be one of {allowed}, got {mode!r}")
    return mode


def _marginal_set(marginals, references):
    if isinstance(marginals, MarginalSet):
        return MarginalSet(marginals.marginals, references)
    return MarginalSet(tuple(marginals), references)


def _generalize(inner: DependencyModel, ms: MarginalSet, spec: DmSpec) -> DependencyModel:
    """Wrap a reference-scale chain so inputs and outputs live on the F_i scale."""
    j, perm = inner.pivot, inner.perm

    def r(x_j, z):
        y_j = ms.to_reference(j, x_j)
        y_w = inner.evaluate(y_j, z)
        return np.column_stack([ms.from_reference(w, y_w[:, k]) for k, w in enumerate(perm)])

    return DependencyModel(spec, ms.transformed_law(j, inner.pivot_law), inner.latent_laws, r)


# ---------------------------------------------------------------------------
# gamma variables under sum constraints
# ---------------------------------------------------------------------------


def gamma_sum_dm(a, beta, c, mode: str = "eq", pivot: int = 0, perm=None) -> DependencyModel:
    """Independent Gamma(a_i, beta) under sum x = c (eq) or sum x < c (lt).

    eq: pivot B1(c, a_j, sum a_w); d-2 Beta latents; the last output is
    (c - x_j) * prod(1 - z). lt: every Beta second shape gains +1 and all
    d-1 outputs are stick-breaking. beta does not enter the conditional law.
    """
    a = _check_positive("gamma shapes", a)
    _check_positive("gamma rate", [beta])
    _check_positive("constraint level c", [c])
    _mode(mode, ("eq", "lt"))
    d = a.size
    if d < 2:
        raise InvalidParams("sum constraints need d >= 2")
    perm, order = _resolve(d, pivot, perm)
    a_o = a[list(order)]
    extra = 1.0 if mode == "lt" else 0.0
    n_lat = d - 2 if mode == "eq" else d - 1
    tails = np.concatenate([np.cumsum(a_o[1:][::-1])[::-1], [0.0]])  # tails[i] = sum_{k>=i+1} a_{w_k}
    pivot_law = uv.b1(c, a_o[0], tails[0] + extra)
    latents = tuple(uv.beta(a_o[i + 1], tails[i + 1] + extra) for i in range(n_lat))
    spec = DmSpec("gamma_sum", {"a": a, "beta": float(beta), "c": float(c), "mode": mode}, pivot, perm)

    def r(x_j, z):
        out = np.empty((len(x_j), d - 1))
        rem = c - x_j
        for k in range(n_lat):
            out[:, k] = z[:, k] * rem
            rem = rem * (1.0 - z[:, k])
        if mode == "eq":
            out[:, -1] = rem
        return out

    return DependencyModel(spec, pivot_law, latents, r)


def general_sum_dm(marginals, a, beta, c, mode: str = "eq", pivot: int = 0, perm=None) -> DependencyModel:
    """Continuous marginals F_i under sum G_i^{-1}(F_i(x_i)) = c (or < c), G_i = Gamma(a_i, beta)."""
    a = _check_positive("gamma shapes", a)
    inner = gamma_sum_dm(a, beta, c, mode, pivot, perm)
    ms = _marginal_set(marginals, tuple(uv.gamma(ai, beta) for ai in a))
    if ms.d != a.size:
        raise InvalidParams("one marginal per gamma shape is required")
    spec = DmSpec(
        "general_sum",
        {"marginals": ms.marginals, "a": a, "beta": float(beta), "c": float(c), "mode": mode},
        pivot,
        inner.perm,
    )
    return _generalize(inner, ms, spec)


# ---------------------------------------------------------------------------
# Gaussian variables under a linear constraint
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SigmaC:
    """Conditional covariance and mean over the chain indices (j, w_1, ..., w_{d-2})."""

    matrix: CovarianceMatrix
    mean: np.ndarray
    order: tuple

    @property
    def chol(self) -> np.ndarray:
        return self.matrix.chol


def sigma_c(sigmas, c, pivot: int = 0, perm=None) -> SigmaC:
    """Sigma^c_{il} = s_i/S (delta_il (s_l + sum_{k != i} s_k) - s_l), s = sigma^2, S = sum s."""
    sd = _check_positive("standard deviations", sigmas)
    d = sd.size
    if d < 2:
        raise InvalidParams("linear constraints need d >= 2")
    perm, order = _resolve(d, pivot, perm)
    idx = list(order[:-1])
    s = sd**2
    total = s.sum()
    si = s[idx]
    delta = np.eye(len(idx))
    rest = total - si  # sum_{k != i} s_k
    mat = si[:, None] / total * (delta * (si[None, :] + rest[:, None]) - si[None, :])
    return SigmaC(CovarianceMatrix(mat), c * si / total, tuple(idx))


def gaussian_linsum_dm(sigmas, c, pivot: int = 0, perm=None) -> DependencyModel:
    """Independent N(0, sigma_i^2) under sum x = c."""
    sd = _check_positive("standard deviations", sigmas)
    if not np.isfinite(c):
        raise InvalidParams("constraint level must be finite")
    d = sd.size
    perm, order = _resolve(d, pivot, perm)
    sc = sigma_c(sd, c, pivot, perm)
    L = sc.chol
    m = sc.mean
    root = math.sqrt(sc.matrix.entries[0, 0])
    spec = DmSpec("gaussian_linsum", {"sigmas": sd, "c": float(c)}, pivot, perm)

    def r(x_j, z):
        inputs = np.column_stack([(x_j - m[0]) / root, z])
        chain = inputs @ L[1:].T + m[1:]
        last = c - x_j - chain.sum(axis=1)
        return np.column_stack([chain, last])

    latents = tuple(uv.normal(0.0, 1.0) for _ in range(d - 2))
    return DependencyModel(spec, uv.normal(m[0], sc.matrix.entries[0, 0]), latents, r)


def general_linsum_dm(marginals, sigmas, c, pivot: int = 0, perm=None) -> DependencyModel:
    """Continuous marginals F_i under sum sigma_i Phi^{-1}(F_i(x_i)) = c."""
    sd = _check_positive("standard deviations", sigmas)
    inner = gaussian_linsum_dm(sd, c, pivot, perm)
    ms = _marginal_set(marginals, tuple(uv.normal(0.0, s * s) for s in sd))
    if ms.d != sd.size:
        raise InvalidParams("one marginal per standard deviation is required")
    spec = DmSpec(
        "general_linsum", {"marginals": ms.marginals, "sigmas": sd, "c": float(c)}, pivot, inner.perm
    )
    return _generalize(inner, ms, spec)


# ---------------------------------------------------------------------------
# Gaussian variables under a quadratic constraint
# ---------------------------------------------------------------------------


def gaussian_quad_dm(d: int, c, mode: str = "on", pivot: int = 0, perm=None) -> DependencyModel:
    """Uniform law on (on) or in (in) the sphere of radius sqrt(c) in R^d.

    on: pivot R GB1(2, sqrt c, 1/2, (d-1)/2); latents R GB1(2, 1, 1/2, (d-i-1)/2),
    i = 1..d-2, plus the Rademacher sign of the closing coordinate.
    in: pivot R GB1(2, sqrt c, 1/2, (d+1)/2); latents R GB1(2, 1, 1/2, (d-i+1)/2), i = 1..d-1.
    """
    d = int(d)
    if d < 2:
        raise InvalidParams("quadratic constraints need d >= 2")
    _check_positive("constraint level c", [c])
    _mode(mode, ("on", "in"))
    perm, order = _resolve(d, pivot, perm)
    spec = DmSpec("gaussian_quad", {"d": d, "c": float(c), "mode": mode}, pivot, perm)
    root_c = math.sqrt(c)
    if mode == "on":
        pivot_law = uv.signed(uv.gb1(2.0, root_c, 0.5, (d - 1) / 2))
        chain = tuple(uv.signed(uv.gb1(2.0, 1.0, 0.5, (d - i - 1) / 2)) for i in range(1, d - 1))
        latents = chain + (uv.rademacher(),)
    else:
        pivot_law = uv.signed(uv.gb1(2.0, root_c, 0.5, (d + 1) / 2))
        chain = tuple(uv.signed(uv.gb1(2.0, 1.0, 0.5, (d - i + 1) / 2)) for i in range(1, d))
        latents = chain
    n_chain = len(chain)

    def r(x_j, z):
        out = np.empty((len(x_j), d - 1))
        rem = np.maximum(c - x_j * x_j, 0.0)
        for k in range(n_chain):
            out[:, k] = z[:, k] * np.sqrt(rem)
            rem = rem * (1.0 - z[:, k] ** 2)
        if mode == "on":
            out[:, -1] = z[:, -1] * np.sqrt(rem)
        return out

    return DependencyModel(spec, pivot_law, latents, r)


def general_quad_dm(marginals, c, mode: str = "on", pivot: int = 0, perm=None) -> DependencyModel:
    """Continuous marginals F_i under sum Phi^{-1}(F_i(x_i))^2 = c (or < c)."""
    marg = marginals.marginals if isinstance(marginals, MarginalSet) else tuple(marginals)
    d = len(marg)
    inner = gaussian_quad_dm(d, c, mode, pivot, perm)
    ms = MarginalSet(marg, tuple(uv.normal(0.0, 1.0) for _ in range(d)))
    spec = DmSpec("general_quad", {"marginals": ms.marginals, "c": float(c), "mode": mode}, pivot, inner.perm)
    return _generalize(inner, ms, spec)


def elliptical_shell_dm(sigma, c, pivot: int = 0, perm=None) -> DependencyModel:
    """N(0, Sigma) conditioned on y' Sigma^{-1} y = c: the on-sphere model lifted by chol(Sigma)."""
    cov = as_covariance(sigma)
    d = cov.dim
    perm, order = _resolve(d, pivot, perm)
    inner = gaussian_quad_dm(d, c, "on", pivot, perm)
    spec = DmSpec("elliptical_shell", {"sigma": cov.entries, "c": float(c)}, pivot, perm)
    return linear_lift(inner, cov.ordered(order).chol, np.zeros(d), spec=spec)


# ---------------------------------------------------------------------------
# trapezoid benchmark
# ---------------------------------------------------------------------------


def trapezoid_constraint(beta) -> ConstraintSpec:
    return ConstraintSpec("sum_lt", 1.0, weights=(float(beta), 1.0))


def trapezoid_dm(beta, which: str = "r1") -> DependencyModel:
    """Uniform law on the trapezoid {x in [0,1]^2 : beta x1 + x2 <= 1}.

    r1: pivot x1 ~ TruncB1(beta), x2 = z (1 - beta x1).
    r2: pivot x2 ~ Trapezoidal(beta), x1 = z min((1 - x2)/beta, 1).
    """
    if not (0 < beta <= 1):
        raise InvalidParams(f"trapezoid needs beta in (0, 1], got {beta}")
    beta = float(beta)
    if which == "r1":
        spec = DmSpec("trapezoid", {"beta": beta, "which": which}, 0, (1,))

        def r(x_j, z):
            return (z[:, 0] * (1.0 - beta * x_j))[:, None]

        return DependencyModel(spec, uv.truncb1(beta), (uv.uniform(0.0, 1.0),), r)
    if which == "r2":
        spec = DmSpec("trapezoid", {"beta": beta, "which": which}, 1, (0,))

        def r(x_j, z):
            return (z[:, 0] * np.minimum((1.0 - x_j) / beta, 1.0))[:, None]

        return DependencyModel(spec, uv.trapezoidal(beta), (uv.uniform(0.0, 1.0),), r)
    raise InvalidParams(f"trapezoid model must be 'r1' or 'r2', got {which!r}")


def constraint_for(model: DependencyModel) -> ConstraintSpec | None:
    """The constraint a constrained-family model satisfies, if any."""
    fam = model.spec.family
    p = model.spec.params
    if fam == "gamma_sum":
        return ConstraintSpec("sum_eq" if p["mode"] == "eq" else "sum_lt", p["c"])
    if fam == "general_sum":
        ms = MarginalSet(p["marginals"], tuple(uv.gamma(ai, p["beta"]) for ai in p["a"]))
        return ConstraintSpec("sum_eq" if p["mode"] == "eq" else "sum_lt", p["c"], transform=ms)
    if fam == "gaussian_linsum":
        return ConstraintSpec("sum_eq", p["c"])
    if fam == "general_linsum":
        ms = MarginalSet(p["marginals"], tuple(uv.normal(0.0, s * s) for s in p["sigmas"]))
        return ConstraintSpec("sum_eq", p["c"], weights=None, transform=ms)
    if fam == "gaussian_quad":
        return ConstraintSpec("quad_eq" if p["mode"] == "on" else "quad_lt", p["c"])
    if fam == "general_quad":
        ms = MarginalSet(p["marginals"], tuple(uv.normal(0.0, 1.0) for _ in p["marginals"]))
        return ConstraintSpec("quad_eq" if p["mode"] == "on" else "quad_lt", p["c"], transform=ms)
    if fam == "trapezoid":
        return trapezoid_constraint(p["beta"])
    return None


__all__: Sequence[str] = [
    "ConstraintSpec",
    "MarginalSet",
    "SigmaC",
    "constraint_for",
    "elliptical_shell_dm",
    "gamma_sum_dm",
    "gaussian_linsum_dm",
    "gaussian_quad_dm",
    "general_linsum_dm",
    "general_quad_dm",
    "general_sum_dm",
    "sigma_c",
    "trapezoid_constraint",
    "trapezoid_dm",
]
