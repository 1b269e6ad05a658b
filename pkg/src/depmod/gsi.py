"""Generalized sensitivity indices (GSIs) and efficient-model selection.

For a model M(X) with independent inputs and output covariance Sigma:

    D_u     = Var(E[M | X_u])                 (first-order SF covariance)
    D_u^tot = Var(M - E[M | X_{~u}])          (total SF covariance)

First type:  trace(D) / trace(Sigma).  Second type: ||D||_F / ||Sigma||_F.
For a DM the model is r_j and u = {pivot}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate

from . import univariate as uv
from .core import DependencyModel, sample_inputs
from .errors import (
    DegenerateOutput,
    InfiniteVariance,
    InvalidParams,
    MixedMethods,
    TooFewSamples,
)
from .numerics import RngStream, as_covariance, as_stream, map_ordered

INDEX_NAMES = ("gsi_fo_trace", "gsi_tot_trace", "gsi_fo_frob", "gsi_tot_frob")
REPLICATES = 16
ANALYTIC_TOL = 1e-12
MC_TOL = 1e-3


@dataclass(frozen=True)
class GsiReport:
    """Four indices of one pivot (0-based) plus estimator metadata."""

    pivot: int
    gsi_fo_trace: float
    gsi_tot_trace: float
    gsi_fo_frob: float
    gsi_tot_frob: float
    method: str = "analytic"
    n: int = 0
    seed: int | None = None
    stderr: dict = field(default_factory=lambda: {k: 0.0 for k in INDEX_NAMES})
    raw: dict = field(default_factory=dict, compare=False, repr=False)
    replicates: tuple = field(default=(), compare=False, repr=False)

    def index(self, name: str) -> float:
        return float(getattr(self, name))

    def as_dict(self) -> dict:
        out = {
            "pivot": self.pivot + 1,
            "method": self.method,
            "n": self.n,
            "seed": -1 if self.seed is None else self.seed,
        }
        for k in INDEX_NAMES:
            out[k] = float(getattr(self, k))
        for k in INDEX_NAMES:
            out["stderr_" + k[4:]] = float(self.stderr.get(k, 0.0))
        return out


@dataclass(frozen=True)
class SelectionResult:
    j_star: int
    ranking: tuple
    tie: bool
    tie_resolution: str
    tol: float

    def as_dict(self) -> dict:
        return {
            "j_star": self.j_star + 1,
            "tie": self.tie,
            "tie_resolution": self.tie_resolution,
            "tol": self.tol,
        }


def _indices(D_fo, D_tot, Sigma):
    tr = float(np.trace(Sigma))
    fro = float(np.linalg.norm(Sigma))
    return {
        "gsi_fo_trace": float(np.trace(D_fo)) / tr,
        "gsi_tot_trace": float(np.trace(D_tot)) / tr,
        "gsi_fo_frob": float(np.linalg.norm(D_fo)) / fro,
        "gsi_tot_frob": float(np.linalg.norm(D_tot)) / fro,
    }


# ---------------------------------------------------------------------------
# analytic indices
# ---------------------------------------------------------------------------


def gsi_gaussian_analytic(mu, sigma, sigmas=None, pivot: int = 0, perm=None) -> GsiReport:
    """Exact GSIs of the pivot in the Gaussian DM.

    ``sigma`` is a covariance matrix, or a correlation matrix when the
    standard deviations ``sigmas`` are also given. The map is affine, so
    first-order and total covariances agree: D = c c' / Sigma_jj with
    c = Cov(X_{~j}, X_j). ``perm`` is validated but the computation runs
    in natural index order: the output permutation cannot change the result.
    """
    cov = np.asarray(as_covariance(sigma).entries, float)
    if sigmas is not None:
        sd = np.asarray(sigmas, float)
        cov = as_covariance(cov * np.outer(sd, sd)).entries
    d = cov.shape[0]
    if d < 2:
        raise InvalidParams("sensitivity indices need d >= 2")
    if mu is not None and np.asarray(mu).shape != (d,):
        raise InvalidParams("mu has the wrong length")
    if not 0 <= pivot < d:
        raise InvalidParams(f"pivot {pivot} outside 0..{d - 1}")
    rest = [k for k in range(d) if k != pivot]
    if perm is not None and sorted(int(k) for k in perm) != rest:
        raise InvalidParams(f"perm {list(perm)} must order the non-pivot indices {rest}")
    out_cov = cov[np.ix_(rest, rest)]
    c = cov[rest, pivot]
    D = np.outer(c, c) / cov[pivot, pivot]
    idx = _indices(D, D, out_cov)
    return GsiReport(pivot=pivot, method="analytic", **idx)


def _trapezoid_moments(beta: float, which: str):
    """E[g(X)], E[g(X)^2] for the pivot X and multiplier g of the model Y = Z g(X)."""
    if which == "r1":
        law = uv.truncb1(beta)

        def g(x):
            return 1.0 - beta * x

        points = None
    elif which == "r2":
        law = uv.trapezoidal(beta)

        def g(x):
            return min((1.0 - x) / beta, 1.0)

        points = [1.0 - beta] if beta < 1 else None
    else:
        raise InvalidParams(f"trapezoid model must be 'r1' or 'r2', got {which!r}")
    opts = dict(epsabs=1e-13, epsrel=1e-13, limit=200, points=points)
    m1 = integrate.quad(lambda x: g(x) * uv.pdf(law, x), 0.0, 1.0, **opts)[0]
    m2 = integrate.quad(lambda x: g(x) ** 2 * uv.pdf(law, x), 0.0, 1.0, **opts)[0]
    return m1, m2


def gsi_trapezoid_analytic(beta: float, which: str = "r1") -> GsiReport:
    """Sobol indices of the pivot in the trapezoid DMs by adaptive quadrature.

    Both models read Y = Z g(X) with Z ~ U(0,1) independent of X, so
    Var(Y) = E[g^2]/3 - E[g]^2/4, first-order Var(g)/4, total Var(g)/3.
    """
    if not (0 < beta <= 1):
        raise InvalidParams(f"beta must lie in (0, 1], got {beta}")
    m1, m2 = _trapezoid_moments(float(beta), which)
    var_g = max(m2 - m1 * m1, 0.0)
    var_y = m2 / 3.0 - m1 * m1 / 4.0
    fo = var_g / 4.0 / var_y
    tot = var_g / 3.0 / var_y
    return GsiReport(
        pivot=0 if which == "r1" else 1,
        gsi_fo_trace=fo,
        gsi_tot_trace=tot,
        gsi_fo_frob=fo,
        gsi_tot_frob=tot,
        method="analytic",
    )


# ---------------------------------------------------------------------------
# pick-freeze Monte Carlo
# ---------------------------------------------------------------------------


def _check_inputs(model: DependencyModel):
    for k, law in enumerate(model.input_laws):
        if not uv.has_finite_variance(law):
            what = "pivot" if k == 0 else f"latent {k}"
            raise InfiniteVariance(f"{what} law {law} has infinite variance")


def _replicate(model, u, m, streams):
    sa, sb = streams
    xa, za = sample_inputs(model, m, sa)
    xb, zb = sample_inputs(model, m, sb)
    A = np.column_stack([xa, za])
    B = np.column_stack([xb, zb])
    C = B.copy()
    C[:, u] = A[:, u]
    ya = model.evaluate(A[:, 0], A[:, 1:])
    yb = model.evaluate(B[:, 0], B[:, 1:])
    yc = model.evaluate(C[:, 0], C[:, 1:])
    # first-order: A and C share X_u only
    ca = ya - ya.mean(axis=0)
    cc = yc - yc.mean(axis=0)
    d_fo = ca.T @ cc / (m - 1)
    d_fo = 0.5 * (d_fo + d_fo.T)
    # total (Jansen): B and C differ in X_u only
    diff = yb - yc
    d_tot = 0.5 * diff.T @ diff / m
    pooled = np.vstack([ya, yb])
    sigma = np.atleast_2d(np.cov(pooled, rowvar=False))
    return d_fo, d_tot, sigma


def gsi_pick_freeze(
    model: DependencyModel,
    u: Sequence[int] = (0,),
    n: int = 2**16,
    rng=0,
    replicates: int = REPLICATES,
) -> GsiReport:
    """Monte Carlo GSIs of the input group ``u`` (0 = pivot, k = latent k).

    ``n`` base rows are split over ``replicates`` independent batches. Each
    batch draws two input matrices A, B from its own substreams and builds
    C = (A on u, B elsewhere). Batch matrices are averaged in replicate
    order; stderrs come from the spread of per-batch indices.
    """
    _check_inputs(model)
    u = sorted({int(k) for k in u})
    n_inputs = 1 + len(model.latent_laws)
    if not u or u[0] < 0 or u[-1] >= n_inputs:
        raise InvalidParams(f"input group {u} outside 0..{n_inputs - 1}")
    if n < 2 * replicates:
        raise TooFewSamples(f"need n >= {2 * replicates} for {replicates} replicates")
    base = as_stream(rng)
    sizes = [n // replicates + (1 if r < n % replicates else 0) for r in range(replicates)]
    jobs = [
        (
            sizes[r],
            (
                RngStream(base.seed, base.stream_id + 2 * r + 1, base.counter),
                RngStream(base.seed, base.stream_id + 2 * r + 2, base.counter),
            ),
        )
        for r in range(replicates)
    ]
    parts = map_ordered(lambda job: _replicate(model, u, job[0], job[1]), jobs)

    w = np.asarray(sizes, float) / n
    d_fo = sum(wi * p[0] for wi, p in zip(w, parts))
    d_tot = sum(wi * p[1] for wi, p in zip(w, parts))
    sigma = sum(wi * p[2] for wi, p in zip(w, parts))
    if float(np.trace(sigma)) <= 1e-14:
        raise DegenerateOutput("output variance is numerically zero")
    raw = _indices(d_fo, d_tot, sigma)

    per = []
    for p in parts:
        if float(np.trace(p[2])) > 1e-14:
            per.append(_indices(*p))
    stderr = {
        k: float(np.std([q[k] for q in per], ddof=1) / math.sqrt(len(per))) if len(per) > 1 else math.nan
        for k in INDEX_NAMES
    }
    clamped = {k: max(v, 0.0) for k, v in raw.items()}
    return GsiReport(
        pivot=model.pivot,
        method="pick_freeze",
        n=int(n),
        seed=base.seed,
        stderr=stderr,
        raw=raw,
        replicates=tuple(per),
        **clamped,
    )


# ---------------------------------------------------------------------------
# selection
# ---------------------------------------------------------------------------

CASCADE = (
    ("gsi_tot_frob", "second_type_total"),
    ("gsi_tot_trace", "first_type_total"),
    ("gsi_fo_frob", "first_order"),
    ("gsi_fo_trace", "first_order"),
)


def select_efficient_dm(reports: Sequence[GsiReport], tol: float | None = None) -> SelectionResult:
    """Pivot with the largest second-type total GSI; ties broken down the cascade."""
    reports = tuple(sorted(reports, key=lambda r: r.pivot))
    if not reports:
        raise InvalidParams("no reports to select from")
    if len({(r.method, r.n) for r in reports}) > 1:
        raise MixedMethods("reports differ in method or sample size")
    if len({r.pivot for r in reports}) != len(reports):
        raise InvalidParams("expected one report per pivot")
    if tol is None:
        tol = ANALYTIC_TOL if reports[0].method == "analytic" else MC_TOL

    candidates = list(reports)
    tie = False
    for step, (key, label) in enumerate(CASCADE):
        best = max(r.index(key) for r in candidates)
        candidates = [r for r in candidates if r.index(key) >= best - tol]
        if step == 0:
            tie = len(candidates) > 1
        if len(candidates) == 1:
            return SelectionResult(candidates[0].pivot, reports, tie, label, tol)
    return SelectionResult(min(r.pivot for r in candidates), reports, True, "equivalent", tol)


# ---------------------------------------------------------------------------
# reference tables
# ---------------------------------------------------------------------------

CORRELATION_SETS = {
    "S1": (-0.999, 0.999, -0.999),
    "S2": (0.25, 0.5, 0.75),
    "S3": (0.6, 0.0, 0.0),
    "S4": (0.0, 0.0, 0.0),
    "S5": (0.25, 0.8, 0.5),
    "S6": (0.0, 0.75, 0.45),
    "S7": (-0.5, 0.5, -0.5),
}
GAUSSIAN_SD = (3.0, 5.0, 4.0)
TRAPEZOID_BETAS = (0.0001, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0)


def correlation_matrix(rho12: float, rho13: float, rho23: float) -> np.ndarray:
    return np.array([[1.0, rho12, rho13], [rho12, 1.0, rho23], [rho13, rho23, 1.0]])


def gaussian_d3_covariance(name: str, sd=GAUSSIAN_SD) -> np.ndarray:
    sd = np.asarray(sd, float)
    return correlation_matrix(*CORRELATION_SETS[name]) * np.outer(sd, sd)


def gaussian_d3_reports(name: str, sd=GAUSSIAN_SD) -> list:
    cov = gaussian_d3_covariance(name, sd)
    return [gsi_gaussian_analytic(np.zeros(3), cov, pivot=j) for j in range(3)]


def reproduce_gaussian_d3() -> list:
    """Rows (set, correlations, pivot, total GSIs of both types, first-order GSIs) for S1..S7."""
    rows = []
    for name, (r12, r13, r23) in CORRELATION_SETS.items():
        for rep in gaussian_d3_reports(name):
            rows.append(
                {
                    "set": name,
                    "rho12": r12,
                    "rho13": r13,
                    "rho23": r23,
                    "pivot": rep.pivot + 1,
                    "gsi_tot_trace": rep.gsi_tot_trace,
                    "gsi_tot_frob": rep.gsi_tot_frob,
                    "gsi_fo_trace": rep.gsi_fo_trace,
                    "gsi_fo_frob": rep.gsi_fo_frob,
                }
            )
    return rows


def reproduce_trapezoid() -> list:
    """Rows (beta, model, first-order, total) over the beta grid; both GSI types coincide."""
    rows = []
    for b in TRAPEZOID_BETAS:
        for which in ("r1", "r2"):
            rep = gsi_trapezoid_analytic(b, which)
            rows.append(
                {"beta": b, "model": which, "first_order": rep.gsi_fo_frob, "total": rep.gsi_tot_frob}
            )
    return rows
