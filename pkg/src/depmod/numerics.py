"""Random streams, covariance handling, special functions and CDF inversion.

Everything here is float64 and stateless apart from the generators handed
out by :class:`RngStream`.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy import special as sp

from .errors import BracketError, DomainError, NotPositiveDefinite

_MASK64 = (1 << 64) - 1

# Rows per counter block. Part of the reproducibility contract: changing it
# changes every sampled value for a given seed.
BLOCK_ROWS = 8192


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream: (seed, stream_id, counter) fixes every draw.

    Backed by Philox4x64 keyed by ``(seed, stream_id)``. Independent blocks
    of the same stream live at distinct counter offsets, so work split over
    any number of workers reproduces the serial output.
    """

    seed: int
    stream_id: int = 0
    counter: int = 0

    def generator(self, block: int = 0) -> np.random.Generator:
        bitgen = np.random.Philox(
            key=np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64),
            counter=np.array([0, 0, block & _MASK64, self.counter & _MASK64], dtype=np.uint64),
        )
        return np.random.Generator(bitgen)

    def spawn(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id, self.counter)

    def advance(self, steps: int = 1) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.counter + steps)


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream, a Generator or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


def as_stream(rng) -> RngStream:
    if isinstance(rng, RngStream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    raise TypeError("block-parallel sampling needs an RngStream or an int seed")


def worker_count() -> int:
    """Worker cap from ``DEPMOD_THREADS``; never affects results."""
    raw = os.environ.get("DEPMOD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def map_ordered(fn: Callable, items: Sequence) -> list:
    """Apply ``fn`` to ``items`` with up to ``worker_count()`` threads, keeping order."""
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------


def cholesky(sigma) -> np.ndarray:
    """Lower-triangular L with L @ L.T == sigma.

    Raises NotPositiveDefinite when a pivot is not strictly positive.
    """
    a = np.asarray(sigma.entries if isinstance(sigma, CovarianceMatrix) else sigma, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise NotPositiveDefinite(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    try:
        L = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if np.any(np.diag(L) <= 0) or not np.all(np.isfinite(L)):
        raise NotPositiveDefinite("non-positive Cholesky pivot")
    return L


@dataclass(frozen=True)
class CovarianceMatrix:
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim == 0:
            a = a.reshape(1, 1)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NotPositiveDefinite(f"covariance must be square, got shape {a.shape}")
        gap = np.abs(a - a.T)
        if np.any(gap > 1e-12 * np.maximum(1.0, np.abs(a))):
            raise NotPositiveDefinite("covariance is not symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        self.chol  # validate eagerly

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def chol(self) -> np.ndarray:
        L = cholesky(self.entries)
        L.setflags(write=False)
        return L

    def ordered(self, order: Sequence[int]) -> "CovarianceMatrix":
        idx = np.asarray(order)
        return CovarianceMatrix(self.entries[np.ix_(idx, idx)])

    @classmethod
    def from_correlation(cls, sd, corr) -> "CovarianceMatrix":
        sd = np.asarray(sd, dtype=float)
        return cls(np.asarray(corr, dtype=float) * np.outer(sd, sd))


def as_covariance(sigma) -> CovarianceMatrix:
    return sigma if isinstance(sigma, CovarianceMatrix) else CovarianceMatrix(np.asarray(sigma, float))


# ---------------------------------------------------------------------------
# special functions
# ---------------------------------------------------------------------------


def _check(cond, msg):
    if not np.all(cond):
        raise DomainError(msg)


def betainc(a, b, x):
    """Regularized incomplete beta I_x(a, b)."""
    a, b, x = (np.asarray(v, dtype=float) for v in (a, b, x))
    _check((a > 0) & (b > 0), "betainc needs a, b > 0")
    _check((x >= 0) & (x <= 1), "betainc needs x in [0, 1]")
    return sp.betainc(a, b, x)


def gammainc(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    a, x = np.asarray(a, dtype=float), np.asarray(x, dtype=float)
    _check(a > 0, "gammainc needs a > 0")
    _check(x >= 0, "gammainc needs x >= 0")
    return sp.gammainc(a, x)


def gammaincc(a, x):
    a, x = np.asarray(a, dtype=float), np.asarray(x, dtype=float)
    _check(a > 0, "gammaincc needs a > 0")
    _check(x >= 0, "gammaincc needs x >= 0")
    return sp.gammaincc(a, x)


def erf(x):
    x = np.asarray(x, dtype=float)
    _check(~np.isnan(x), "erf of NaN")
    return sp.erf(x)


_SPECIAL = {
    "betainc": betainc,
    "gammainc": gammainc,
    "gammaincc": gammaincc,
    "erf": erf,
}


def special(kind: str, *args):
    """Dispatch by name: ``special("betainc", a, b, x)``, ``special("gammainc", a, x)``, ``special("erf", x)``."""
    try:
        fn = _SPECIAL[kind]
    except KeyError:
        raise DomainError(f"unknown special function {kind!r}") from None
    out = fn(*args)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# CDF inversion
# ---------------------------------------------------------------------------


def _expand(cdf, u, start, toward_low):
    """Push an infinite bracket end out from ``start`` until it encloses every u."""
    x = np.array(start, dtype=float)
    width = np.ones_like(u)
    for _ in range(2100):
        f = np.asarray(cdf(x), dtype=float)
        bad = (f >= u) if toward_low else (f < u)
        if not bad.any():
            return x
        x = np.where(bad, x - width if toward_low else x + width, x)
        width = np.where(bad, width * 2.0, width)
        if not np.all(np.isfinite(x)):
            break
    raise BracketError("could not expand an infinite bracket to enclose u")


def invert_cdf(cdf: Callable, u, bracket=(0.0, 1.0), *, maxiter: int = 600):
    """Generalized inverse ``inf{x : cdf(x) >= u}`` by safeguarded secant/bisection.

    ``cdf`` must be vectorized and nondecreasing. ``u`` may be an array.
    Bracket ends may be infinite; they are expanded geometrically.
    Odd iterations are plain bisection, so the bracket at least halves
    every two steps and flat stretches resolve to their left end.
    """
    u_arr = np.asarray(u, dtype=float)
    scalar = u_arr.ndim == 0
    u_arr = np.atleast_1d(u_arr).astype(float)
    if not np.all((u_arr > 0) & (u_arr < 1)):
        raise DomainError("invert_cdf needs u in the open interval (0, 1)")
    lo = np.broadcast_to(np.asarray(bracket[0], dtype=float), u_arr.shape).copy()
    hi = np.broadcast_to(np.asarray(bracket[1], dtype=float), u_arr.shape).copy()
    if np.any(lo >= hi):
        raise BracketError("bracket must satisfy lo < hi")

    inf_lo = ~np.isfinite(lo)
    inf_hi = ~np.isfinite(hi)
    if inf_lo.any():
        start = np.where(np.isfinite(hi[inf_lo]), hi[inf_lo] - 1.0, 0.0)
        lo[inf_lo] = _expand(cdf, u_arr[inf_lo], start, True)
    if inf_hi.any():
        start = np.where(inf_lo[inf_hi], 0.0, lo[inf_hi] + 1.0)
        hi[inf_hi] = _expand(cdf, u_arr[inf_hi], np.maximum(start, lo[inf_hi] + 1e-300), False)

    flo = np.asarray(cdf(lo), dtype=float)
    fhi = np.asarray(cdf(hi), dtype=float)
    if np.any(flo >= u_arr) or np.any(fhi < u_arr):
        raise BracketError("u is not enclosed by the bracket: need cdf(lo) < u <= cdf(hi)")

    for it in range(maxiter):
        scale = np.maximum(np.abs(lo), np.abs(hi))
        active = (hi - lo) > 4.0 * np.finfo(float).eps * scale + 1e-300
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        a, b, fa, fb, uu = lo[idx], hi[idx], flo[idx], fhi[idx], u_arr[idx]
        mid = a + 0.5 * (b - a)
        if it % 2 == 0:
            with np.errstate(divide="ignore", invalid="ignore"):
                sec = a + (uu - fa) * (b - a) / (fb - fa)
            margin = 1e-3 * (b - a)
            ok = np.isfinite(sec) & (sec > a + margin) & (sec < b - margin)
            x = np.where(ok, sec, mid)
        else:
            x = mid
        fx = np.asarray(cdf(x), dtype=float)
        right = fx >= uu
        hi[idx] = np.where(right, x, b)
        fhi[idx] = np.where(right, fx, fb)
        lo[idx] = np.where(right, a, x)
        flo[idx] = np.where(right, fa, fx)
    return float(hi[0]) if scalar else hi
