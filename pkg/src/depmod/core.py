"""Dependency-model abstraction.

A dependency model (DM) writes every coordinate but one as a deterministic
map of a pivot coordinate ``x_j`` and independent latents ``z``::

    (x_{w_1}, ..., x_{w_{d-1}}) = r_j(x_j, z)

Output ``w_k`` may depend on ``x_j`` and ``z_1..z_k`` only (triangularity).
Indices are 0-based throughout the Python API.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import univariate as uv
from .errors import (
    DomainError,
    InvalidParams,
    MonotonicityViolation,
    SingularLift,
)
from .numerics import BLOCK_ROWS, as_covariance, as_stream, map_ordered

MapFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _canonical(value):
    if isinstance(value, np.ndarray):
        return [_canonical(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, Mapping):
        return {str(k): _canonical(v) for k, v in sorted(value.items())}
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int, bool, str)) or value is None:
        return value if not isinstance(value, np.integer) else int(value)
    if isinstance(value, uv.DistributionSpec):
        return {"family": value.family, "params": _canonical(value.params)}
    if hasattr(value, "entries"):
        return _canonical(value.entries)
    if callable(value):
        return getattr(value, "__qualname__", repr(value))
    return repr(value)


@dataclass(frozen=True, eq=False)
class DmSpec:
    """Family tag, parameters, pivot ``j`` and output order ``w`` (0-based)."""

    family: str
    params: Mapping = field(default_factory=dict)
    pivot: int = 0
    perm: tuple = ()

    def __post_init__(self):
        perm = tuple(int(k) for k in self.perm)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "pivot", int(self.pivot))
        d = len(perm) + 1
        if not 0 <= self.pivot < d:
            raise InvalidParams(f"pivot {self.pivot} outside 0..{d - 1}")
        if sorted(perm) != [k for k in range(d) if k != self.pivot]:
            raise InvalidParams(
                f"perm {list(perm)} must be a permutation of the non-pivot indices of 0..{d - 1}"
            )

    @property
    def d(self) -> int:
        return len(self.perm) + 1

    @property
    def order(self) -> tuple:
        """Chain order (j, w_1, ..., w_{d-1})."""
        return (self.pivot,) + self.perm

    def digest(self) -> str:
        payload = json.dumps(
            {
                "family": self.family,
                "params": _canonical(dict(self.params)),
                "pivot": self.pivot,
                "perm": list(self.perm),
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def __eq__(self, other):
        return isinstance(other, DmSpec) and self.digest() == other.digest()

    def __hash__(self):
        return hash(self.digest())


def default_perm(d: int, pivot: int) -> tuple:
    return tuple(k for k in range(d) if k != pivot)


@dataclass(frozen=True)
class DependencyModel:
    """Pivot law, independent latent laws and the map r_j."""

    spec: DmSpec
    pivot_law: uv.DistributionSpec
    latent_laws: tuple
    map_fn: MapFn = field(repr=False)

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def pivot(self) -> int:
        return self.spec.pivot

    @property
    def perm(self) -> tuple:
        return self.spec.perm

    @property
    def input_laws(self) -> tuple:
        """Pivot law followed by the latent laws: all independent model inputs."""
        return (self.pivot_law,) + tuple(self.latent_laws)

    def evaluate(self, x_j: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Vectorized map without support checks: (n,), (n, m) -> (n, d-1)."""
        out = self.map_fn(np.asarray(x_j, float), np.asarray(z, float).reshape(len(x_j), -1))
        return np.asarray(out, float).reshape(len(x_j), self.d - 1)

    def push_forward(self, x_j, z):
        return push_forward(self, x_j, z)


@dataclass(frozen=True)
class SampleBatch:
    """n x d realizations in natural column order."""

    values: np.ndarray = field(repr=False)
    seed: int | None = None
    spec_digest: str = ""

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def sample_inputs(model: DependencyModel, n: int, rng):
    """Draw (x_j, z) for n rows: block b of the stream feeds rows [b*BLOCK_ROWS, ...)."""
    stream = as_stream(rng)
    m = len(model.latent_laws)
    starts = list(range(0, n, BLOCK_ROWS))

    def block(start):
        gen = stream.generator(block=start // BLOCK_ROWS)
        rows = min(BLOCK_ROWS, n - start)
        x_j = uv.sample(model.pivot_law, rows, gen)
        z = np.empty((rows, m))
        for k, law in enumerate(model.latent_laws):
            z[:, k] = uv.sample(law, rows, gen)
        return x_j, z

    parts = map_ordered(block, starts)
    if not parts:
        return np.empty(0), np.empty((0, m))
    return np.concatenate([p[0] for p in parts]), np.vstack([p[1] for p in parts])


def assemble(model: DependencyModel, x_j: np.ndarray, outputs: np.ndarray) -> np.ndarray:
    """Place the pivot and chain outputs back into natural column order."""
    values = np.empty((len(x_j), model.d))
    values[:, model.pivot] = x_j
    values[:, list(model.perm)] = outputs
    return values


def sample_batch(model: DependencyModel, n: int, rng) -> SampleBatch:
    """n i.i.d. rows of the joint law; identical for any DEPMOD_THREADS value."""
    if n < 1:
        raise InvalidParams("n must be at least 1")
    stream = as_stream(rng)
    x_j, z = sample_inputs(model, n, stream)
    starts = list(range(0, n, BLOCK_ROWS))
    outs = map_ordered(
        lambda s: model.evaluate(x_j[s : s + BLOCK_ROWS], z[s : s + BLOCK_ROWS]), starts
    )
    return SampleBatch(assemble(model, x_j, np.vstack(outs)), stream.seed, model.spec.digest())


def push_forward(model: DependencyModel, x_j, z):
    """Evaluate r_j at a point (or rows of points); rejects x_j outside the open pivot support."""
    x_arr = np.atleast_1d(np.asarray(x_j, dtype=float))
    lo, hi = uv.support(model.pivot_law)
    if model.pivot_law.family == "rademacher":
        ok = np.abs(x_arr) == 1.0
    else:
        ok = (x_arr > lo) & (x_arr < hi)
    if not np.all(ok):
        raise DomainError(f"pivot value outside the open support ({lo}, {hi})")
    m = len(model.latent_laws)
    z_arr = np.asarray(z, dtype=float).reshape(len(x_arr), m)
    out = model.evaluate(x_arr, z_arr)
    return out[0] if np.ndim(x_j) == 0 else out


# ---------------------------------------------------------------------------
# linear lift
# ---------------------------------------------------------------------------


def linear_lift(model: DependencyModel, L, mu, spec: DmSpec | None = None) -> DependencyModel:
    """DM of Y = L X + mu, with L lower-triangular and L, mu in chain order (j, w_1, ...).

    The pivot of Y is affine in the pivot of X, so the inverse
    x_j = (y_j - mu_0) / L_00 recovers the inner pivot.
    """
    L = np.array(L, dtype=float)
    mu = np.array(mu, dtype=float)
    d = model.d
    if L.shape != (d, d) or mu.shape != (d,):
        raise InvalidParams(f"lift needs a {d}x{d} matrix and {d} offsets")
    if np.any(np.triu(L, 1) != 0):
        raise InvalidParams("lift matrix must be lower-triangular")
    if L[0, 0] == 0:
        raise SingularLift("lift matrix has a zero leading diagonal entry")
    if L[0, 0] < 0:
        raise InvalidParams("lift matrix must have a positive leading diagonal entry")
    L.setflags(write=False)
    mu.setflags(write=False)
    inner = model

    def lifted(y_j, z):
        x_j = (y_j - mu[0]) / L[0, 0]
        x_rest = inner.evaluate(x_j, z)
        full = np.column_stack([x_j, x_rest])
        return full @ L[1:].T + mu[1:]

    return DependencyModel(
        spec=spec or model.spec,
        pivot_law=uv.locscale(model.pivot_law, float(mu[0]), float(L[0, 0])),
        latent_laws=model.latent_laws,
        map_fn=lifted,
    )


def ordered_cholesky(sigma, order: Sequence[int]) -> np.ndarray:
    """Cholesky factor of sigma with rows/columns taken in ``order``."""
    return as_covariance(sigma).ordered(order).chol


# ---------------------------------------------------------------------------
# generic conditional-quantile chain
# ---------------------------------------------------------------------------

_SPOT_U = np.linspace(0.01, 0.99, 25)
_SPOT_PIVOT = (0.1, 0.5, 0.9)


def chain_from_conditionals(
    pivot_law: uv.DistributionSpec,
    conditional_quantiles: Sequence[Callable],
    pivot: int = 0,
    perm: Sequence[int] | None = None,
    family: str = "chain",
) -> DependencyModel:
    """DM with uniform latents: x_{w_k} = q_k(z_k, x_j, x_{w_1..w_{k-1}}).

    Callback ``q_k(u, x_j, prev)`` gets arrays u (n,), x_j (n,) and prev
    (n, k) and returns the conditional quantile of the k-th output. A
    few conditioning points are probed at build time; a decreasing
    response in u raises MonotonicityViolation.
    """
    qs = tuple(conditional_quantiles)
    d = len(qs) + 1
    perm = tuple(perm) if perm is not None else default_perm(d, pivot)
    spec = DmSpec(family, {"callbacks": [getattr(q, "__qualname__", repr(q)) for q in qs]}, pivot, perm)

    def chain(x_j, z):
        out = np.empty((len(x_j), len(qs)))
        for k, q in enumerate(qs):
            out[:, k] = q(z[:, k], x_j, out[:, :k])
        return out

    _spot_check(pivot_law, qs)
    return DependencyModel(spec, pivot_law, tuple(uv.uniform(0.0, 1.0) for _ in qs), chain)


def _spot_check(pivot_law, qs):
    m = len(_SPOT_U)
    for pu in _SPOT_PIVOT:
        x_j = np.full(m, uv.quantile(pivot_law, pu))
        prev = np.empty((m, 0))
        for k, q in enumerate(qs):
            vals = np.asarray(q(_SPOT_U, x_j, prev), float)
            scale = max(1.0, float(np.nanmax(np.abs(vals))) if vals.size else 1.0)
            if np.any(np.diff(vals) < -1e-12 * scale):
                raise MonotonicityViolation(
                    f"conditional quantile {k + 1} decreases in its probability argument"
                )
            # condition the next callback on the median path
            mid = np.asarray(q(np.full(m, 0.5), x_j, prev), float)
            prev = np.column_stack([prev, mid])


def check_triangular(model: DependencyModel, n: int = 32, rng=0, eps: float = 1e-3) -> bool:
    """Perturb each latent z_k and confirm outputs before w_k do not move."""
    x_j, z = sample_inputs(model, n, rng)
    base = model.evaluate(x_j, z)
    for k in range(z.shape[1]):
        z2 = z.copy()
        law = model.latent_laws[k]
        if law.family == "rademacher":
            z2[:, k] = -z2[:, k]
        else:
            u = np.clip(uv.cdf(law, z[:, k]) + eps, 1e-9, 1 - 1e-9)
            z2[:, k] = uv.quantile(law, u)
        moved = model.evaluate(x_j, z2)
        if not np.array_equal(moved[:, :k], base[:, :k]):
            return False
    return True


__all__ = [
    "DmSpec",
    "DependencyModel",
    "SampleBatch",
    "assemble",
    "chain_from_conditionals",
    "check_triangular",
    "default_perm",
    "linear_lift",
    "ordered_cholesky",
    "push_forward",
    "sample_batch",
    "sample_inputs",
]
