"""Stick-breaking dependency models on simplices, p-balls and p-spheres.

Parameter vectors ``a`` and ``b`` are indexed by variable (natural order);
each constructor reads them in the chain order (j, w_1, ..., w_{d-1}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import univariate as uv
from .core import DependencyModel, DmSpec, default_perm
from .errors import InvalidParams

ORTHANTS = ("signed", "positive")


@dataclass(frozen=True)
class DirichletParams:
    a: np.ndarray
    b: np.ndarray
    p: float = 1.0
    orthant: str = "signed"

    def __post_init__(self):
        a = np.array(self.a, dtype=float).reshape(-1)
        b = np.array(self.b, dtype=float).reshape(-1)
        if a.size < 1 or a.shape != b.shape:
            raise InvalidParams("a and b must be non-empty and of equal length")
        if not (np.all(np.isfinite(a)) and np.all(a > 0) and np.all(np.isfinite(b)) and np.all(b > 0)):
            raise InvalidParams("all a_k and b_k must be finite and > 0")
        if not (np.isfinite(self.p) and self.p > 0):
            raise InvalidParams(f"p must be > 0, got {self.p}")
        if self.orthant not in ORTHANTS:
            raise InvalidParams(f"orthant must be one of {ORTHANTS}")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def d(self) -> int:
        return self.a.size


def _chain_betas(a, b, order, n_chain):
    """Pivot and latent Beta parameters over the first ``n_chain`` chain outputs.

    Pivot: Beta(a_j, b_j + sum_{k<=n} s_k); latent i: Beta(a_{w_i}, b_{w_i} + sum_{k>i} s_k)
    with s_k = a_{w_k} + b_{w_k} - 1.
    """
    a_o = a[list(order)]
    b_o = b[list(order)]
    s = a_o[1 : n_chain + 1] + b_o[1 : n_chain + 1] - 1.0
    tail = np.concatenate([np.cumsum(s[::-1])[::-1], [0.0]])  # tail[i] = sum_{k>=i} s_k
    pivot = (a_o[0], b_o[0] + tail[0])
    latents = [(a_o[i + 1], b_o[i + 1] + tail[i + 1]) for i in range(n_chain)]
    for _, second in [pivot] + latents:
        if not second > 0:
            raise InvalidParams("generalized Dirichlet parameters give a non-positive Beta shape")
    return pivot, latents


def _resolve(d, pivot, perm):
    perm = tuple(perm) if perm is not None else default_perm(d, pivot)
    return perm, (pivot,) + perm


def gd_dm(a, b, pivot: int = 0, perm=None, initial_marginals: bool = False) -> DependencyModel:
    """Generalized Dirichlet GD(a, b) on the open simplex.

    With ``initial_marginals`` the latents are drawn from the marginal
    laws of the coordinates they stand for and mapped onto the chain's
    Beta laws by a quantile transform before stick-breaking.
    """
    params = DirichletParams(a, b)
    d = params.d
    perm, order = _resolve(d, pivot, perm)
    piv, lat = _chain_betas(params.a, params.b, order, d - 1)
    spec = DmSpec(
        "gd", {"a": params.a, "b": params.b, "initial_marginals": bool(initial_marginals)}, pivot, perm
    )
    chain_laws = tuple(uv.beta(*ab) for ab in lat)

    if initial_marginals:
        total = float(np.sum(params.a + params.b - 1.0))
        input_laws = tuple(
            uv.beta(params.a[w], params.b[w] + total - (params.a[w] + params.b[w] - 1.0)) for w in perm
        )
        transforms = tuple(zip(input_laws, chain_laws))
    else:
        input_laws = chain_laws
        transforms = ()

    def r(x_j, z):
        if transforms:
            z = np.column_stack(
                [uv.quantile(dst, uv.open_unit(uv.cdf(src, z[:, k]))) for k, (src, dst) in enumerate(transforms)]
            )
        out = np.empty_like(z)
        rem = 1.0 - x_j
        for k in range(z.shape[1]):
            out[:, k] = z[:, k] * rem
            rem = rem * (1.0 - z[:, k])
        return out

    return DependencyModel(spec, uv.beta(*piv), input_laws, r)


def dirichlet_dm(alpha, pivot: int = 0, perm=None) -> DependencyModel:
    """Dirichlet D(alpha_1, ..., alpha_d, alpha_{d+1}) of the first d coordinates.

    Equivalent to GD with b = 1 everywhere except the last chain position,
    which carries alpha_{d+1}.
    """
    alpha = np.array(alpha, dtype=float).reshape(-1)
    if alpha.size < 2:
        raise InvalidParams("Dirichlet needs at least two parameters (d >= 1)")
    d = alpha.size - 1
    perm, order = _resolve(d, pivot, perm)
    b = np.ones(d)
    b[order[-1]] = alpha[-1]
    model = gd_dm(alpha[:d], b, pivot, perm)
    spec = DmSpec("dirichlet", {"alpha": alpha}, pivot, perm)
    return DependencyModel(spec, model.pivot_law, model.latent_laws, model.map_fn)


def _signed_or_not(law, orthant):
    return uv.signed(law) if orthant == "signed" else law


def pgd_dm(p, a, b, pivot: int = 0, perm=None, orthant: str = "signed") -> DependencyModel:
    """p-generalized Dirichlet on the p-ball: |X_k|^p follow GD(a, b), independent signs.

    Signed latents carry the Rademacher factor of their output in their sign.
    """
    params = DirichletParams(a, b, float(p), orthant)
    d = params.d
    perm, order = _resolve(d, pivot, perm)
    piv, lat = _chain_betas(params.a, params.b, order, d - 1)
    spec = DmSpec("pgd", {"p": params.p, "a": params.a, "b": params.b, "orthant": orthant}, pivot, perm)
    inv_p = 1.0 / params.p
    pivot_law = _signed_or_not(uv.gb1(params.p, 1.0, *piv), orthant)
    latents = tuple(_signed_or_not(uv.beta(*ab), orthant) for ab in lat)

    def r(x_j, z):
        out = np.empty_like(z)
        rem = 1.0 - np.abs(x_j) ** params.p
        for k in range(z.shape[1]):
            mag = np.abs(z[:, k])
            out[:, k] = np.sign(z[:, k]) * (mag * rem) ** inv_p
            rem = rem * (1.0 - mag)
        return out

    return DependencyModel(spec, pivot_law, latents, r)


def pgd_sphere_dm(p, a, b, pivot: int = 0, perm=None, orthant: str = "signed") -> DependencyModel:
    """p-generalized Dirichlet on the p-sphere sum |x_k|^p = 1.

    d-2 stick-breaking outputs, then the last coordinate closes the
    constraint by subtraction; its sign is an extra Rademacher latent.
    """
    params = DirichletParams(a, b, float(p), orthant)
    d = params.d
    if d < 2:
        raise InvalidParams("the p-sphere model needs d >= 2")
    perm, order = _resolve(d, pivot, perm)
    piv, lat = _chain_betas(params.a, params.b, order, d - 2)
    spec = DmSpec(
        "pgd_sphere", {"p": params.p, "a": params.a, "b": params.b, "orthant": orthant}, pivot, perm
    )
    inv_p = 1.0 / params.p
    pw = params.p
    signed = orthant == "signed"
    pivot_law = _signed_or_not(uv.gb1(pw, 1.0, *piv), orthant)
    latents = tuple(_signed_or_not(uv.beta(*ab), orthant) for ab in lat)
    if signed:
        latents = latents + (uv.rademacher(),)

    def r(x_j, z):
        n_chain = d - 2
        out = np.empty((len(x_j), d - 1))
        rem = 1.0 - np.abs(x_j) ** pw
        used = np.abs(x_j) ** pw
        for k in range(n_chain):
            mag = np.abs(z[:, k])
            out[:, k] = np.sign(z[:, k]) * (mag * rem) ** inv_p
            used = used + np.abs(out[:, k]) ** pw
            rem = rem * (1.0 - mag)
        last = np.maximum(1.0 - used, 0.0) ** inv_p
        out[:, -1] = z[:, n_chain] * last if signed else last
        return out

    return DependencyModel(spec, pivot_law, latents, r)


def uniform_pball_dm(p, d: int, pivot: int = 0, perm=None, orthant: str = "signed") -> DependencyModel:
    """Uniform law on the unit p-ball (or its positive orthant): p-GD with a = 1/p, b = 1."""
    if d < 1:
        raise InvalidParams("d must be >= 1")
    if not p > 0:
        raise InvalidParams("p must be > 0")
    base = pgd_dm(p, np.full(d, 1.0 / p), np.ones(d), pivot, perm, orthant)
    spec = DmSpec("uniform_pball", {"p": float(p), "d": int(d), "orthant": orthant}, pivot, base.perm)
    return DependencyModel(spec, base.pivot_law, base.latent_laws, base.map_fn)


def uniform_psphere_dm(p, d: int, pivot: int = 0, perm=None, orthant: str = "signed") -> DependencyModel:
    """Uniform model on the unit p-sphere; p = 1 with the positive orthant gives the flat simplex."""
    if d < 2:
        raise InvalidParams("d must be >= 2")
    if not p > 0:
        raise InvalidParams("p must be > 0")
    base = pgd_sphere_dm(p, np.full(d, 1.0 / p), np.ones(d), pivot, perm, orthant)
    spec = DmSpec("uniform_psphere", {"p": float(p), "d": int(d), "orthant": orthant}, pivot, base.perm)
    return DependencyModel(spec, base.pivot_law, base.latent_laws, base.map_fn)
