"""Univariate laws: sampling, CDF, quantile, support and low moments.

A :class:`DistributionSpec` is an immutable ``(family, params)`` pair. The
module-level constructors (``normal``, ``beta``, ...) validate parameters;
``sample``/``cdf``/``quantile`` dispatch on the family name.

Four wrapper families compose the base laws:

``signed``       R * B with R a Rademacher sign independent of B >= 0
``locscale``     loc + scale * B
``transformed``  dst.quantile(src.cdf(B))  (monotone marginal change)
``custom``       an arbitrary continuous CDF, inverted numerically
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sp

from .errors import DomainError, InvalidParams
from .numerics import as_generator, invert_cdf


@dataclass(frozen=True)
class DistributionSpec:
    family: str
    params: tuple = ()

    def sample(self, n, rng):
        return sample(self, n, rng)

    def cdf(self, x):
        return cdf(self, x)

    def quantile(self, u):
        return quantile(self, u)

    def pdf(self, x):
        return pdf(self, x)

    @property
    def support(self):
        return support(self)

    def __str__(self):
        args = ", ".join(str(p) for p in self.params)
        return f"{self.family}({args})"


def _positive(name, *vals):
    for v in vals:
        if not (np.isfinite(v) and v > 0):
            raise InvalidParams(f"{name}: parameters must be finite and > 0, got {vals}")


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def normal(mu=0.0, var=1.0):
    if not np.isfinite(mu):
        raise InvalidParams("normal: mu must be finite")
    _positive("normal variance", var)
    return DistributionSpec("normal", (float(mu), float(var)))


def student_t(nu):
    _positive("student_t", nu)
    return DistributionSpec("student_t", (float(nu),))


def cauchy():
    return DistributionSpec("cauchy", ())


def beta(a, b):
    _positive("beta", a, b)
    return DistributionSpec("beta", (float(a), float(b)))


def b1(c, a, b):
    """c * Beta(a, b)."""
    _positive("b1", c, a, b)
    return DistributionSpec("b1", (float(c), float(a), float(b)))


def gb1(p, r, a, b):
    """r * Beta(a, b) ** (1/p)."""
    _positive("gb1", p, r, a, b)
    return DistributionSpec("gb1", (float(p), float(r), float(a), float(b)))


def gamma(a, rate=1.0):
    _positive("gamma", a, rate)
    return DistributionSpec("gamma", (float(a), float(rate)))


def inverse_gamma(a, scale=1.0):
    """scale / Gamma(a, 1)."""
    _positive("inverse_gamma", a, scale)
    return DistributionSpec("inverse_gamma", (float(a), float(scale)))


def uniform(lo=0.0, hi=1.0):
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise InvalidParams(f"uniform: need finite lo < hi, got ({lo}, {hi})")
    return DistributionSpec("uniform", (float(lo), float(hi)))


def rademacher():
    return DistributionSpec("rademacher", ())


def trapezoidal(beta_):
    """Density 2/(2-b) on [0, 1-b], then linear down to 0 at 1."""
    if not (0 < beta_ <= 1):
        raise InvalidParams(f"trapezoidal: beta must lie in (0, 1], got {beta_}")
    return DistributionSpec("trapezoidal", (float(beta_),))


def truncb1(beta_):
    """Density 2(1 - b x)/(2 - b) on [0, 1]."""
    if not (0 < beta_ <= 1):
        raise InvalidParams(f"truncb1: beta must lie in (0, 1], got {beta_}")
    return DistributionSpec("truncb1", (float(beta_),))


def signed(base: DistributionSpec):
    lo, _ = support(base)
    if lo < 0:
        raise InvalidParams("signed: base law must live on [0, inf)")
    return DistributionSpec("signed", (base,))


def locscale(base: DistributionSpec, loc=0.0, scale=1.0):
    _positive("locscale scale", scale)
    if loc == 0.0 and scale == 1.0:
        return base
    return DistributionSpec("locscale", (base, float(loc), float(scale)))


def transformed(base: DistributionSpec, src: DistributionSpec, dst: DistributionSpec):
    """Law of dst.quantile(src.cdf(B)) for B ~ base."""
    return DistributionSpec("transformed", (base, src, dst))


def custom(cdf_fn: Callable, lo=-np.inf, hi=np.inf, name="custom"):
    """Continuous law given only by a vectorized, strictly increasing CDF."""
    if not lo < hi:
        raise InvalidParams("custom: need lo < hi")
    return DistributionSpec("custom", (cdf_fn, float(lo), float(hi), name))


# ---------------------------------------------------------------------------
# per-family implementations
# ---------------------------------------------------------------------------


def _log_gamma_draws(gen, a, n):
    """log of Gamma(a, 1) draws; shape boost G(a) = G(a+1) U^(1/a) for a < 1."""
    if a >= 1:
        return np.log(gen.standard_gamma(a, n))
    g = gen.standard_gamma(a + 1.0, n)
    u = gen.random(n)
    return np.log(g) + np.log1p(-u) / a


def _beta_draws(gen, a, b, n):
    la = _log_gamma_draws(gen, a, n)
    lb = _log_gamma_draws(gen, b, n)
    return sp.expit(la - lb)


def _t_cdf(nu, x):
    x = np.asarray(x, dtype=float)
    t2 = x * x
    small = t2 < nu
    with np.errstate(divide="ignore", invalid="ignore"):
        # central region: 1/2 + sign/2 * I_{t2/(nu+t2)}(1/2, nu/2)
        central = 0.5 + 0.5 * np.sign(x) * sp.betainc(0.5, 0.5 * nu, t2 / (nu + t2))
        tail = 0.5 * sp.betainc(0.5 * nu, 0.5, nu / (nu + t2))
    out = np.where(small, central, np.where(x > 0, 1.0 - tail, tail))
    return np.where(np.isinf(x), (x > 0).astype(float), out)


def _trap_cdf(b, x):
    x = np.asarray(x, dtype=float)
    k = 2.0 / (2.0 - b)
    flat = k * x
    with np.errstate(invalid="ignore"):
        slope = 1.0 - (1.0 - x) ** 2 / (b * (2.0 - b))
    out = np.where(x <= 1.0 - b, flat, slope)
    return np.clip(np.where(x <= 0, 0.0, np.where(x >= 1, 1.0, out)), 0.0, 1.0)


def _trap_quantile(b, u):
    u = np.asarray(u, dtype=float)
    knot = 2.0 * (1.0 - b) / (2.0 - b)
    flat = 0.5 * u * (2.0 - b)
    with np.errstate(invalid="ignore"):
        slope = 1.0 - np.sqrt(np.maximum((1.0 - u) * b * (2.0 - b), 0.0))
    return np.where(u <= knot, flat, slope)


def _trap_pdf(b, x):
    x = np.asarray(x, dtype=float)
    inside = (x >= 0) & (x <= 1)
    val = np.where(x <= 1.0 - b, 2.0 / (2.0 - b), 2.0 * (1.0 - x) / (b * (2.0 - b)))
    return np.where(inside, val, 0.0)


def _tb1_cdf(b, x):
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return (2.0 * x - b * x * x) / (2.0 - b)


def _tb1_quantile(b, u):
    u = np.asarray(u, dtype=float)
    # root of b x^2 - 2x + u(2-b) = 0 in [0, 1], cancellation-free form
    return u * (2.0 - b) / (1.0 + np.sqrt(1.0 - b * u * (2.0 - b)))


def _beta_moment(a, b, s):
    return math.exp(sp.betaln(a + s, b) - sp.betaln(a, b))


class _Family:
    """Interface: every method receives the params tuple first."""

    def support(self, p):
        return (-np.inf, np.inf)


class _Normal(_Family):
    def sample(self, p, n, gen):
        return p[0] + math.sqrt(p[1]) * gen.standard_normal(n)

    def cdf(self, p, x):
        return sp.ndtr((np.asarray(x, float) - p[0]) / math.sqrt(p[1]))

    def quantile(self, p, u):
        return p[0] + math.sqrt(p[1]) * sp.ndtri(u)

    def pdf(self, p, x):
        z = (np.asarray(x, float) - p[0]) / math.sqrt(p[1])
        return np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi * p[1])

    def moments(self, p):
        return p[0], p[1]


class _StudentT(_Family):
    def sample(self, p, n, gen):
        return gen.standard_t(p[0], n)

    def cdf(self, p, x):
        return _t_cdf(p[0], x)

    def quantile(self, p, u):
        # stdtrit is good to ~1e-11; one Newton step on the incomplete-beta CDF sharpens it
        x = sp.stdtrit(p[0], u)
        with np.errstate(invalid="ignore", over="ignore"):
            step = (_t_cdf(p[0], x) - u) / self.pdf(p, x)
        return np.where(np.isfinite(step), x - step, x)

    def pdf(self, p, x):
        nu = p[0]
        x = np.asarray(x, float)
        logc = sp.gammaln((nu + 1) / 2) - sp.gammaln(nu / 2) - 0.5 * math.log(nu * math.pi)
        return np.exp(logc - 0.5 * (nu + 1) * np.log1p(x * x / nu))

    def moments(self, p):
        nu = p[0]
        return (0.0 if nu > 1 else math.nan), (nu / (nu - 2) if nu > 2 else math.inf)


class _Cauchy(_Family):
    def sample(self, p, n, gen):
        return gen.standard_cauchy(n)

    def cdf(self, p, x):
        return 0.5 + np.arctan(np.asarray(x, float)) / math.pi

    def quantile(self, p, u):
        return np.tan(math.pi * (np.asarray(u, float) - 0.5))

    def pdf(self, p, x):
        x = np.asarray(x, float)
        return 1.0 / (math.pi * (1.0 + x * x))

    def moments(self, p):
        return math.nan, math.inf


class _Beta(_Family):
    def support(self, p):
        return (0.0, 1.0)

    def sample(self, p, n, gen):
        return _beta_draws(gen, p[0], p[1], n)

    def cdf(self, p, x):
        return sp.betainc(p[0], p[1], np.clip(np.asarray(x, float), 0.0, 1.0))

    def quantile(self, p, u):
        return sp.betaincinv(p[0], p[1], u)

    def pdf(self, p, x):
        x = np.asarray(x, float)
        inside = (x > 0) & (x < 1)
        xs = np.where(inside, x, 0.5)
        val = np.exp((p[0] - 1) * np.log(xs) + (p[1] - 1) * np.log1p(-xs) - sp.betaln(p[0], p[1]))
        return np.where(inside, val, 0.0)

    def moments(self, p):
        a, b = p
        return a / (a + b), a * b / ((a + b) ** 2 * (a + b + 1))


class _B1(_Family):
    def support(self, p):
        return (0.0, p[0])

    def sample(self, p, n, gen):
        return p[0] * _beta_draws(gen, p[1], p[2], n)

    def cdf(self, p, x):
        return _Beta().cdf(p[1:], np.asarray(x, float) / p[0])

    def quantile(self, p, u):
        return p[0] * sp.betaincinv(p[1], p[2], u)

    def pdf(self, p, x):
        return _Beta().pdf(p[1:], np.asarray(x, float) / p[0]) / p[0]

    def moments(self, p):
        m, v = _Beta().moments(p[1:])
        return p[0] * m, p[0] ** 2 * v


class _GB1(_Family):
    def support(self, p):
        return (0.0, p[1])

    def sample(self, p, n, gen):
        w = _beta_draws(gen, p[2], p[3], n)
        return p[1] * w ** (1.0 / p[0])

    def cdf(self, p, x):
        y = np.clip(np.asarray(x, float) / p[1], 0.0, 1.0)
        return sp.betainc(p[2], p[3], y ** p[0])

    def quantile(self, p, u):
        return p[1] * sp.betaincinv(p[2], p[3], u) ** (1.0 / p[0])

    def pdf(self, p, x):
        pw, r, a, b = p
        y = np.asarray(x, float) / r
        inside = (y > 0) & (y < 1)
        ys = np.where(inside, y, 0.5)
        w = ys**pw
        dens = _Beta().pdf((a, b), w) * pw * ys ** (pw - 1) / r
        return np.where(inside, dens, 0.0)

    def moments(self, p):
        pw, r, a, b = p
        m1 = _beta_moment(a, b, 1.0 / pw)
        m2 = _beta_moment(a, b, 2.0 / pw)
        return r * m1, r * r * (m2 - m1 * m1)


class _Gamma(_Family):
    def support(self, p):
        return (0.0, np.inf)

    def sample(self, p, n, gen):
        return np.exp(_log_gamma_draws(gen, p[0], n)) / p[1]

    def cdf(self, p, x):
        return sp.gammainc(p[0], np.maximum(np.asarray(x, float), 0.0) * p[1])

    def quantile(self, p, u):
        return sp.gammaincinv(p[0], u) / p[1]

    def pdf(self, p, x):
        a, r = p
        x = np.asarray(x, float)
        inside = x > 0
        xs = np.where(inside, x, 1.0)
        val = np.exp(a * math.log(r) + (a - 1) * np.log(xs) - r * xs - sp.gammaln(a))
        return np.where(inside, val, 0.0)

    def moments(self, p):
        return p[0] / p[1], p[0] / p[1] ** 2


class _InverseGamma(_Family):
    def support(self, p):
        return (0.0, np.inf)

    def sample(self, p, n, gen):
        return p[1] * np.exp(-_log_gamma_draws(gen, p[0], n))

    def cdf(self, p, x):
        x = np.asarray(x, float)
        with np.errstate(divide="ignore"):
            return np.where(x > 0, sp.gammaincc(p[0], p[1] / np.where(x > 0, x, 1.0)), 0.0)

    def quantile(self, p, u):
        return p[1] / sp.gammainccinv(p[0], u)

    def pdf(self, p, x):
        a, s = p
        x = np.asarray(x, float)
        inside = x > 0
        xs = np.where(inside, x, 1.0)
        val = np.exp(a * math.log(s) - (a + 1) * np.log(xs) - s / xs - sp.gammaln(a))
        return np.where(inside, val, 0.0)

    def moments(self, p):
        a, s = p
        mean = s / (a - 1) if a > 1 else math.inf
        var = s * s / ((a - 1) ** 2 * (a - 2)) if a > 2 else math.inf
        return mean, var


class _Uniform(_Family):
    def support(self, p):
        return p

    def sample(self, p, n, gen):
        return p[0] + (p[1] - p[0]) * gen.random(n)

    def cdf(self, p, x):
        return np.clip((np.asarray(x, float) - p[0]) / (p[1] - p[0]), 0.0, 1.0)

    def quantile(self, p, u):
        return p[0] + (p[1] - p[0]) * np.asarray(u, float)

    def pdf(self, p, x):
        x = np.asarray(x, float)
        return np.where((x >= p[0]) & (x <= p[1]), 1.0 / (p[1] - p[0]), 0.0)

    def moments(self, p):
        return 0.5 * (p[0] + p[1]), (p[1] - p[0]) ** 2 / 12.0


class _Rademacher(_Family):
    def support(self, p):
        return (-1.0, 1.0)

    def sample(self, p, n, gen):
        return np.where(gen.random(n) < 0.5, -1.0, 1.0)

    def cdf(self, p, x):
        x = np.asarray(x, float)
        return np.where(x < -1, 0.0, np.where(x < 1, 0.5, 1.0))

    def quantile(self, p, u):
        return np.where(np.asarray(u, float) <= 0.5, -1.0, 1.0)

    def pdf(self, p, x):
        raise DomainError("rademacher has no density")

    def moments(self, p):
        return 0.0, 1.0


class _Trapezoidal(_Family):
    def support(self, p):
        return (0.0, 1.0)

    def sample(self, p, n, gen):
        return _trap_quantile(p[0], gen.random(n))

    def cdf(self, p, x):
        return _trap_cdf(p[0], x)

    def quantile(self, p, u):
        return _trap_quantile(p[0], u)

    def pdf(self, p, x):
        return _trap_pdf(p[0], x)

    def moments(self, p):
        b = p[0]
        k = 2.0 / (2.0 - b)
        c = 2.0 / (b * (2.0 - b))
        # tail integrals in t = 1 - x over [0, b]
        m1 = k * (1 - b) ** 2 / 2 + c * (b**2 / 2 - b**3 / 3)
        m2 = k * (1 - b) ** 3 / 3 + c * (b**2 / 2 - 2 * b**3 / 3 + b**4 / 4)
        return m1, m2 - m1 * m1


class _TruncB1(_Family):
    def support(self, p):
        return (0.0, 1.0)

    def sample(self, p, n, gen):
        return _tb1_quantile(p[0], gen.random(n))

    def cdf(self, p, x):
        return _tb1_cdf(p[0], x)

    def quantile(self, p, u):
        return _tb1_quantile(p[0], u)

    def pdf(self, p, x):
        x = np.asarray(x, float)
        b = p[0]
        return np.where((x >= 0) & (x <= 1), 2.0 * (1.0 - b * x) / (2.0 - b), 0.0)

    def moments(self, p):
        b = p[0]
        k = 2.0 / (2.0 - b)
        m1 = k * (0.5 - b / 3)
        m2 = k * (1 / 3 - b / 4)
        return m1, m2 - m1 * m1


class _Signed(_Family):
    def support(self, p):
        return (-support(p[0])[1], support(p[0])[1])

    def sample(self, p, n, gen):
        mag = sample(p[0], n, gen)
        sign = np.where(gen.random(n) < 0.5, -1.0, 1.0)
        return sign * mag

    def cdf(self, p, x):
        x = np.asarray(x, float)
        return 0.5 + 0.5 * np.sign(x) * cdf(p[0], np.abs(x))

    def quantile(self, p, u):
        u = np.asarray(u, float)
        v = np.clip(np.abs(2.0 * u - 1.0), 0.0, 1.0)
        mag = np.where(v > 0, _raw_quantile(p[0], np.where(v > 0, v, 0.5)), 0.0)
        return np.sign(u - 0.5) * mag

    def pdf(self, p, x):
        return 0.5 * pdf(p[0], np.abs(np.asarray(x, float)))

    def moments(self, p):
        m, v = moments(p[0])
        return 0.0, v + m * m


class _LocScale(_Family):
    def support(self, p):
        lo, hi = support(p[0])
        return (p[1] + p[2] * lo, p[1] + p[2] * hi)

    def sample(self, p, n, gen):
        return p[1] + p[2] * sample(p[0], n, gen)

    def cdf(self, p, x):
        return cdf(p[0], (np.asarray(x, float) - p[1]) / p[2])

    def quantile(self, p, u):
        return p[1] + p[2] * _raw_quantile(p[0], u)

    def pdf(self, p, x):
        return pdf(p[0], (np.asarray(x, float) - p[1]) / p[2]) / p[2]

    def moments(self, p):
        m, v = moments(p[0])
        return p[1] + p[2] * m, p[2] ** 2 * v


class _Transformed(_Family):
    def support(self, p):
        return support(p[2])

    def sample(self, p, n, gen):
        return self.forward(p, sample(p[0], n, gen))

    def forward(self, p, b):
        base, src, dst = p
        return _raw_quantile(dst, open_unit(cdf(src, b)))

    def cdf(self, p, x):
        base, src, dst = p
        u = np.asarray(cdf(dst, x), float)
        inner = np.where((u > 0) & (u < 1), u, 0.5)
        val = cdf(base, _raw_quantile(src, inner))
        return np.where(u <= 0, 0.0, np.where(u >= 1, 1.0, val))

    def quantile(self, p, u):
        return self.forward(p, _raw_quantile(p[0], u))

    def pdf(self, p, x):
        raise DomainError("transformed laws expose no density")

    def moments(self, p):
        return math.nan, math.nan


class _Custom(_Family):
    def support(self, p):
        return (p[1], p[2])

    def sample(self, p, n, gen):
        u = gen.random(n)
        return self.quantile(p, np.clip(u, 1e-300, 1 - 2**-53))

    def cdf(self, p, x):
        x = np.asarray(x, float)
        inside = np.clip(x, p[1], p[2]) if np.isfinite(p[1]) or np.isfinite(p[2]) else x
        return np.clip(np.asarray(p[0](inside), float), 0.0, 1.0)

    def quantile(self, p, u):
        return invert_cdf(lambda x: self.cdf(p, x), u, (p[1], p[2]))

    def pdf(self, p, x):
        raise DomainError("custom laws expose no density")

    def moments(self, p):
        return math.nan, math.nan


_FAMILIES = {
    "normal": _Normal(),
    "student_t": _StudentT(),
    "cauchy": _Cauchy(),
    "beta": _Beta(),
    "b1": _B1(),
    "gb1": _GB1(),
    "gamma": _Gamma(),
    "inverse_gamma": _InverseGamma(),
    "uniform": _Uniform(),
    "rademacher": _Rademacher(),
    "trapezoidal": _Trapezoidal(),
    "truncb1": _TruncB1(),
    "signed": _Signed(),
    "locscale": _LocScale(),
    "transformed": _Transformed(),
    "custom": _Custom(),
}

FAMILY_NAMES = tuple(_FAMILIES)


def _impl(dist: DistributionSpec) -> _Family:
    try:
        return _FAMILIES[dist.family]
    except KeyError:
        raise InvalidParams(f"unknown family {dist.family!r}") from None


def open_unit(u):
    # keep quantile arguments away from 0 and 1 where inverses blow up
    return np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)


def _raw_quantile(dist, u):
    return _impl(dist).quantile(dist.params, u)


# ---------------------------------------------------------------------------
# public dispatch
# ---------------------------------------------------------------------------


def sample(dist: DistributionSpec, n: int, rng) -> np.ndarray:
    """n i.i.d. draws; deterministic given the generator state."""
    if n < 0:
        raise InvalidParams("sample size must be non-negative")
    return np.asarray(_impl(dist).sample(dist.params, int(n), as_generator(rng)), dtype=float)


def cdf(dist: DistributionSpec, x):
    out = _impl(dist).cdf(dist.params, x)
    return float(out) if np.ndim(out) == 0 else np.asarray(out, float)


def quantile(dist: DistributionSpec, u):
    """Generalized inverse of the CDF for u in (0, 1)."""
    u_arr = np.asarray(u, dtype=float)
    if not np.all((u_arr > 0) & (u_arr < 1)):
        raise DomainError("quantile needs u in the open interval (0, 1)")
    out = _raw_quantile(dist, u_arr)
    return float(out) if np.ndim(out) == 0 else np.asarray(out, float)


def pdf(dist: DistributionSpec, x):
    out = _impl(dist).pdf(dist.params, x)
    return float(out) if np.ndim(out) == 0 else np.asarray(out, float)


def support(dist: DistributionSpec):
    lo, hi = _impl(dist).support(dist.params)
    return float(lo), float(hi)


def moments(dist: DistributionSpec):
    """(mean, variance); inf for divergent moments, nan when not available in closed form."""
    return _impl(dist).moments(dist.params)


def has_finite_variance(dist: DistributionSpec) -> bool:
    _, var = moments(dist)
    if math.isnan(var):
        lo, hi = support(dist)
        if dist.family == "transformed":
            # bounded target support is enough; otherwise trust the target's own variance
            target_var = moments(dist.params[2])[1]
            return bool(np.isfinite(lo) and np.isfinite(hi)) or math.isfinite(target_var)
        return True
    return math.isfinite(var)


def sample_student_t(nu, rng, n=None):
    """Draw(s) from the standard t law with ``nu`` > 0 degrees of freedom."""
    dist = student_t(nu)
    if n is None:
        return float(sample(dist, 1, rng)[0])
    return sample(dist, n, rng)
