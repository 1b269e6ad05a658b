"""Family-name dispatch from a :class:`DmSpec` to a concrete model constructor.

``spec.params`` holds the constructor's keyword arguments; the pivot and
permutation come from the spec itself.
"""

from __future__ import annotations

import inspect

import numpy as np

from . import constrained, elliptical, simplex
from .core import DependencyModel, DmSpec
from .errors import InvalidParams, UnsupportedFamily


def _trapezoid(beta, pivot=0, perm=None):
    return constrained.trapezoid_dm(beta, which=f"r{pivot + 1}")


CONSTRUCTORS = {
    "gaussian": elliptical.gaussian_dm,
    "student_t": elliptical.student_t_dm,
    "cauchy": elliptical.cauchy_dm,
    "gd": simplex.gd_dm,
    "dirichlet": simplex.dirichlet_dm,
    "pgd": simplex.pgd_dm,
    "pgd_sphere": simplex.pgd_sphere_dm,
    "uniform_pball": simplex.uniform_pball_dm,
    "uniform_psphere": simplex.uniform_psphere_dm,
    "gamma_sum": constrained.gamma_sum_dm,
    "general_sum": constrained.general_sum_dm,
    "gaussian_linsum": constrained.gaussian_linsum_dm,
    "general_linsum": constrained.general_linsum_dm,
    "gaussian_quad": constrained.gaussian_quad_dm,
    "general_quad": constrained.general_quad_dm,
    "elliptical_shell": constrained.elliptical_shell_dm,
    "trapezoid": _trapezoid,
}

FAMILIES = tuple(CONSTRUCTORS)

# Families whose location vector may be omitted (defaults to zero).
_OPTIONAL_MU = ("gaussian", "student_t", "cauchy")


def family_parameters(family: str) -> tuple:
    """Keyword parameters of a family, excluding pivot and perm."""
    if family not in CONSTRUCTORS:
        raise UnsupportedFamily(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")
    sig = inspect.signature(CONSTRUCTORS[family])
    return tuple(k for k in sig.parameters if k not in ("pivot", "perm"))


def required_parameters(family: str) -> tuple:
    sig = inspect.signature(CONSTRUCTORS[family])
    return tuple(
        k
        for k, p in sig.parameters.items()
        if p.default is inspect.Parameter.empty
        and k not in ("pivot", "perm")
        and not (k == "mu" and family in _OPTIONAL_MU)
    )


def dimension(family: str, params: dict) -> int:
    """Number of variables d implied by a family's parameters."""
    p = params
    if family in ("gaussian", "student_t", "cauchy", "elliptical_shell"):
        return int(np.atleast_2d(np.asarray(p["sigma"], float)).shape[0])
    if family in ("gd", "pgd", "pgd_sphere", "gamma_sum", "general_sum"):
        return len(p["a"])
    if family == "dirichlet":
        return len(p["alpha"]) - 1
    if family in ("uniform_pball", "uniform_psphere", "gaussian_quad"):
        return int(p["d"])
    if family in ("gaussian_linsum", "general_linsum"):
        return len(p["sigmas"])
    if family == "general_quad":
        return len(p["marginals"])
    if family == "trapezoid":
        return 2
    raise UnsupportedFamily(f"unknown family {family!r}")


def build_dm(spec: DmSpec) -> DependencyModel:
    """Construct the model named by ``spec``."""
    allowed = family_parameters(spec.family)
    params = dict(spec.params)
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        raise InvalidParams(f"{spec.family}: unknown parameter(s) {', '.join(unknown)}")
    missing = [k for k in required_parameters(spec.family) if k not in params]
    if missing:
        raise InvalidParams(f"{spec.family}: missing parameter(s) {', '.join(missing)}")
    if spec.family in _OPTIONAL_MU:
        params.setdefault("mu", None)
    if spec.family == "trapezoid" and spec.d != 2:
        raise InvalidParams("trapezoid models are bivariate")
    return CONSTRUCTORS[spec.family](**params, pivot=spec.pivot, perm=spec.perm)
