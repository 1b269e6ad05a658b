"""Independent reference samplers and goodness-of-fit tests.

None of the samplers here go through a dependency model: each uses a
textbook construction (rejection, normal/gamma mixtures, normalization)
so that agreement with a DM is evidence rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import univariate as uv
from .constrained import ConstraintSpec
from .core import SampleBatch
from .errors import AcceptanceTooLow, InvalidParams, TooFewSamples
from .numerics import as_generator, as_stream, map_ordered

MIN_ACCEPTANCE = 1e-6
MIN_SAMPLES = 100
MIN_PERMUTATIONS = 200


@dataclass(frozen=True)
class TestOutcome:
    statistic: float
    critical_value: float
    level: float
    reject: bool
    n_a: int
    n_b: int = 0
    p_value: float = math.nan

    __test__ = False  # keep pytest from collecting this class


@dataclass(frozen=True)
class RejectionBatch(SampleBatch):
    acceptance: float = math.nan
    draws: int = 0


def _batch(values, rng, tag):
    seed = rng.seed if hasattr(rng, "seed") else (int(rng) if isinstance(rng, (int, np.integer)) else None)
    return SampleBatch(np.asarray(values, float), seed, tag)


# ---------------------------------------------------------------------------
# reference samplers
# ---------------------------------------------------------------------------


def rejection_sample(
    base: Sequence[uv.DistributionSpec],
    constraint: ConstraintSpec,
    band_eps: float,
    n: int,
    rng,
    chunk: int = 200_000,
    pilot: int = 100_000,
) -> RejectionBatch:
    """Independent draws from ``base`` kept when they satisfy the constraint.

    Equality kinds accept |g(x) - c| <= band_eps; inequality kinds use the
    exact constraint. A pilot run estimates the acceptance rate and aborts
    below 1e-6.
    """
    base = tuple(base)
    if n < 1:
        raise InvalidParams("n must be >= 1")
    if constraint.is_equality and not band_eps > 0:
        raise InvalidParams("equality constraints need a positive band width")
    gen = as_generator(rng)

    def draw(m):
        x = np.column_stack([uv.sample(law, m, gen) for law in base])
        return x[constraint.satisfied(x, band_eps)]

    first = draw(pilot)
    rate = len(first) / pilot
    if rate < MIN_ACCEPTANCE:
        raise AcceptanceTooLow(f"pilot acceptance {rate:.3g} below {MIN_ACCEPTANCE:g}")
    kept = [first]
    total_kept, total_drawn = len(first), pilot
    while total_kept < n:
        x = draw(chunk)
        kept.append(x)
        total_kept += len(x)
        total_drawn += chunk
    values = np.vstack(kept)[:n]
    seed = rng.seed if hasattr(rng, "seed") else None
    return RejectionBatch(values, seed, "rejection", total_kept / total_drawn, total_drawn)


def mixture_t_sample(nu, mu, sigma, n: int, rng) -> SampleBatch:
    """t_d(nu, mu, Sigma) as sqrt(W) R + mu with W ~ InvGamma(nu/2, nu/2), R ~ N(0, Sigma)."""
    if not nu > 0:
        raise InvalidParams("nu must be > 0")
    sigma = np.atleast_2d(np.asarray(sigma, float))
    d = sigma.shape[0]
    mu = np.zeros(d) if mu is None else np.asarray(mu, float)
    gen = as_generator(rng)
    L = np.linalg.cholesky(sigma)
    r = gen.standard_normal((n, d)) @ L.T
    w = uv.sample(uv.inverse_gamma(nu / 2, nu / 2), n, gen)
    return _batch(np.sqrt(w)[:, None] * r + mu, rng, "mixture_t")


def normal_ratio_cauchy(d: int, n: int, rng, mu=None, sigma=None) -> SampleBatch:
    """C_d(mu, Sigma) as L N_d(0, I) / |N(0, 1)| + mu."""
    gen = as_generator(rng)
    num = gen.standard_normal((n, d))
    den = np.abs(gen.standard_normal(n))
    x = num / den[:, None]
    if sigma is not None:
        x = x @ np.linalg.cholesky(np.asarray(sigma, float)).T
    if mu is not None:
        x = x + np.asarray(mu, float)
    return _batch(x, rng, "normal_ratio")


def dirichlet_oracle(alpha, n: int, rng) -> SampleBatch:
    """All K coordinates of Dirichlet(alpha) as normalized independent Gamma(alpha_k, 1) draws."""
    alpha = np.asarray(alpha, float)
    gen = as_generator(rng)
    g = np.column_stack([gen.standard_gamma(a, n) for a in alpha])
    return _batch(g / g.sum(axis=1, keepdims=True), rng, "dirichlet")


def sphere_oracle(d: int, c: float, mode: str, n: int, rng) -> SampleBatch:
    """Uniform on (mode='on') or in (mode='in') the sphere of radius sqrt(c) in R^d."""
    if d < 2 or not c > 0:
        raise InvalidParams("need d >= 2 and c > 0")
    if mode not in ("on", "in"):
        raise InvalidParams("mode must be 'on' or 'in'")
    gen = as_generator(rng)
    x = gen.standard_normal((n, d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    radius = math.sqrt(c)
    if mode == "in":
        radius = radius * gen.random(n) ** (1.0 / d)
        x *= radius[:, None]
    else:
        x *= radius
    return _batch(x, rng, "sphere")


# ---------------------------------------------------------------------------
# tests
# ---------------------------------------------------------------------------


def _ks_coefficient(level: float) -> float:
    return math.sqrt(-0.5 * math.log(level / 2.0))


def ks_test(samples, cdf: Callable | uv.DistributionSpec, level: float = 0.01) -> TestOutcome:
    """One-sample Kolmogorov-Smirnov test with the asymptotic critical value."""
    x = np.sort(np.asarray(samples, float).reshape(-1))
    n = x.size
    if n < MIN_SAMPLES:
        raise TooFewSamples(f"KS test needs n >= {MIN_SAMPLES}, got {n}")
    f = uv.cdf(cdf, x) if isinstance(cdf, uv.DistributionSpec) else np.asarray(cdf(x), float)
    i = np.arange(1, n + 1)
    stat = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    crit = _ks_coefficient(level) / math.sqrt(n)
    return TestOutcome(stat, crit, level, stat > crit, n)


def ks_2samp_test(a, b, level: float = 0.01) -> TestOutcome:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic critical value."""
    a = np.sort(np.asarray(a, float).reshape(-1))
    b = np.sort(np.asarray(b, float).reshape(-1))
    n, m = a.size, b.size
    if min(n, m) < MIN_SAMPLES:
        raise TooFewSamples(f"KS test needs n >= {MIN_SAMPLES} per side")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / n
    fb = np.searchsorted(b, grid, side="right") / m
    stat = float(np.max(np.abs(fa - fb)))
    crit = _ks_coefficient(level) * math.sqrt((n + m) / (n * m))
    return TestOutcome(stat, crit, level, stat > crit, n, m)


def _values(x):
    v = x.values if isinstance(x, SampleBatch) else np.asarray(x, float)
    return v.reshape(len(v), -1)


def energy_test(
    a,
    b,
    level: float = 0.01,
    n_permutations: int = MIN_PERMUTATIONS,
    rng=0,
    chunk_rows: int = 1024,
) -> TestOutcome:
    """Two-sample energy-distance test calibrated by label permutations.

    With pooled pairwise distances D and group indicator s (n ones), the
    statistic is nm/(n+m) (2/(nm) s'D(1-s) - s'Ds/n^2 - (1-s)'D(1-s)/m^2).
    All permutation statistics share one pass over D: row blocks of D are
    multiplied by the indicator matrix of every labeling at once.
    """
    xa, xb = _values(a), _values(b)
    n, m = len(xa), len(xb)
    if min(n, m) < MIN_SAMPLES:
        raise TooFewSamples(f"energy test needs n >= {MIN_SAMPLES} per side")
    if n_permutations < MIN_PERMUTATIONS:
        raise InvalidParams(f"energy test needs at least {MIN_PERMUTATIONS} permutations")
    if xa.shape[1] != xb.shape[1]:
        raise InvalidParams("samples differ in dimension")
    pooled = np.vstack([xa, xb])
    N = n + m
    gen = as_generator(rng if not hasattr(rng, "seed") else as_stream(rng))
    labels = np.zeros((N, n_permutations + 1))
    labels[:n, 0] = 1.0
    for p in range(1, n_permutations + 1):
        labels[gen.permutation(N)[:n], p] = 1.0
    sq = np.einsum("ij,ij->i", pooled, pooled)

    def block(start):
        rows = pooled[start : start + chunk_rows]
        d2 = sq[start : start + chunk_rows, None] + sq[None, :] - 2.0 * rows @ pooled.T
        dist = np.sqrt(np.maximum(d2, 0.0))
        s_in = labels[start : start + chunk_rows]
        quad = np.einsum("ip,ip->p", dist @ labels, s_in)  # s' D s contribution
        lin = s_in.T @ dist.sum(axis=1)  # s' D 1 contribution
        total = dist.sum()
        return quad, lin, total

    parts = map_ordered(block, list(range(0, N, chunk_rows)))
    ss = sum(p[0] for p in parts)
    s1 = sum(p[1] for p in parts)
    total = sum(p[2] for p in parts)
    cross = s1 - ss  # s' D (1 - s)
    other = total - 2.0 * s1 + ss  # (1 - s)' D (1 - s)
    stats = (n * m / N) * (2.0 * cross / (n * m) - ss / n**2 - other / m**2)
    observed = float(stats[0])
    perm = np.sort(stats[1:])[::-1]
    allowed = math.floor(level * (n_permutations + 1)) - 1
    crit = float(perm[allowed]) if allowed >= 0 else math.inf
    p_value = (1.0 + float(np.sum(perm >= observed))) / (n_permutations + 1.0)
    return TestOutcome(observed, crit, level, observed > crit, n, m, p_value)


def cauchy_scale(x) -> np.ndarray:
    """Coordinatewise Cauchy CDF: maps heavy-tailed samples to (0, 1) for distance tests."""
    return 0.5 + np.arctan(_values(x)) / math.pi
