"""Model spec files (TOML, schema 1).

Grammar::

    schema = 1                 # required
    family = "gaussian"        # required, see registry.FAMILIES
    pivot = 1                  # 1-based, default 1
    perm = [2, 3]              # 1-based chain order of the other variables, optional
    seed = 42                  # default seed for commands, optional

    [params]                   # constructor parameters of the family
    sigma = [[9.0, 3.75], [3.75, 25.0]]

    [constraint]               # constrained families only
    kind = "sum_eq"            # sum_eq | sum_lt | quad_eq | quad_lt
    c = 1.0

    [[marginals]]              # general_sum / general_linsum / general_quad only
    law = "gamma"
    params = [2.0, 1.0]

Gaussian-type families may give ``sd`` and ``corr`` instead of ``sigma``.
Every unknown key is rejected with an error naming it.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import univariate as uv
from .core import DmSpec, default_perm
from .errors import DepmodError, SpecParseError
from .registry import FAMILIES, dimension, family_parameters

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCHEMA_VERSION = 1
TOP_KEYS = ("schema", "family", "pivot", "perm", "seed", "params", "constraint", "marginals")

# constraint kind -> constructor mode, per family
_CONSTRAINED = {
    "gamma_sum": {"sum_eq": "eq", "sum_lt": "lt"},
    "general_sum": {"sum_eq": "eq", "sum_lt": "lt"},
    "gaussian_linsum": {"sum_eq": None},
    "general_linsum": {"sum_eq": None},
    "gaussian_quad": {"quad_eq": "on", "quad_lt": "in"},
    "general_quad": {"quad_eq": "on", "quad_lt": "in"},
    "elliptical_shell": {"quad_eq": None},
}
_WITH_MARGINALS = ("general_sum", "general_linsum", "general_quad")
_COVARIANCE_FAMILIES = ("gaussian", "student_t", "cauchy", "elliptical_shell")

MARGINAL_LAWS = {
    "normal": uv.normal,
    "student_t": uv.student_t,
    "cauchy": uv.cauchy,
    "beta": uv.beta,
    "b1": uv.b1,
    "gb1": uv.gb1,
    "gamma": uv.gamma,
    "inverse_gamma": uv.inverse_gamma,
    "uniform": uv.uniform,
    "trapezoidal": uv.trapezoidal,
    "truncb1": uv.truncb1,
}


@dataclass(frozen=True)
class ModelFile:
    """Parsed spec file: the model spec plus an optional default seed."""

    spec: DmSpec
    seed: int | None = None
    source: str = field(default="", compare=False)

    def with_pivot(self, pivot: int) -> DmSpec:
        """Same family and parameters with another pivot and the default chain order."""
        return DmSpec(self.spec.family, self.spec.params, pivot, default_perm(self.spec.d, pivot))


def _fail(field_name: str, msg: str):
    raise SpecParseError(f"field '{field_name}': {msg}")


def _int(doc, key, default=None):
    if key not in doc:
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(key, f"expected an integer, got {v!r}")
    return v


def _marginal(entry, k) -> uv.DistributionSpec:
    name = f"marginals[{k + 1}]"
    if not isinstance(entry, dict):
        _fail(name, "expected a table")
    extra = sorted(set(entry) - {"law", "params"})
    if extra:
        _fail(f"{name}.{extra[0]}", "unknown field")
    law = entry.get("law")
    if law not in MARGINAL_LAWS:
        _fail(f"{name}.law", f"unknown law {law!r}; known: {', '.join(MARGINAL_LAWS)}")
    args = entry.get("params", [])
    if not isinstance(args, list):
        _fail(f"{name}.params", "expected a list of numbers")
    try:
        return MARGINAL_LAWS[law](*args)
    except (TypeError, DepmodError) as exc:
        _fail(f"{name}.params", str(exc))


def parse_spec(doc: dict, source: str = "") -> ModelFile:
    """Validate a decoded spec document and build the corresponding DmSpec."""
    unknown = sorted(set(doc) - set(TOP_KEYS))
    if unknown:
        _fail(unknown[0], "unknown field")
    if "schema" not in doc:
        _fail("schema", "missing (expected schema = 1)")
    if _int(doc, "schema") != SCHEMA_VERSION:
        _fail("schema", f"unsupported version {doc['schema']!r} (expected {SCHEMA_VERSION})")
    family = doc.get("family")
    if family is None:
        _fail("family", "missing")
    if family not in FAMILIES:
        _fail("family", f"unknown family {family!r}; known: {', '.join(FAMILIES)}")

    raw = doc.get("params", {})
    if not isinstance(raw, dict):
        _fail("params", "expected a table")
    params = dict(raw)
    if family in _COVARIANCE_FAMILIES and ("sd" in params or "corr" in params):
        if "sigma" in params:
            _fail("params.sigma", "give either sigma or sd and corr, not both")
        if "sd" not in params or "corr" not in params:
            _fail("params.sd" if "sd" not in params else "params.corr", "sd and corr must be given together")
        sd = np.asarray(params.pop("sd"), float)
        corr = np.asarray(params.pop("corr"), float)
        if corr.shape != (sd.size, sd.size):
            _fail("params.corr", f"expected a {sd.size}x{sd.size} matrix")
        params["sigma"] = (corr * np.outer(sd, sd)).tolist()

    allowed = family_parameters(family)
    for key in sorted(params):
        if key not in allowed or key in ("c", "mode", "marginals"):
            _fail(f"params.{key}", f"unknown field for family {family}")

    if family in _CONSTRAINED:
        block = doc.get("constraint")
        if not isinstance(block, dict):
            _fail("constraint", f"family {family} needs a [constraint] table with kind and c")
        extra = sorted(set(block) - {"kind", "c"})
        if extra:
            _fail(f"constraint.{extra[0]}", "unknown field")
        kinds = _CONSTRAINED[family]
        if block.get("kind") not in kinds:
            _fail("constraint.kind", f"family {family} accepts {', '.join(kinds)}")
        c = block.get("c")
        if isinstance(c, bool) or not isinstance(c, (int, float)):
            _fail("constraint.c", "expected a number")
        params["c"] = float(c)
        if kinds[block["kind"]] is not None:
            params["mode"] = kinds[block["kind"]]
    elif "constraint" in doc:
        _fail("constraint", f"family {family} takes no constraint")

    if family in _WITH_MARGINALS:
        entries = doc.get("marginals")
        if not isinstance(entries, list) or not entries:
            _fail("marginals", f"family {family} needs [[marginals]] entries")
        params["marginals"] = tuple(_marginal(e, k) for k, e in enumerate(entries))
    elif "marginals" in doc:
        _fail("marginals", f"family {family} takes no marginals")

    try:
        d = dimension(family, params)
    except (KeyError, TypeError, ValueError) as exc:
        _fail("params", f"cannot determine the dimension: {exc}")
    pivot = _int(doc, "pivot", 1)
    if not 1 <= pivot <= d:
        _fail("pivot", f"must lie in 1..{d}, got {pivot}")
    if "perm" in doc:
        perm = doc["perm"]
        if not isinstance(perm, list) or any(isinstance(k, bool) or not isinstance(k, int) for k in perm):
            _fail("perm", "expected a list of integers")
        if sorted(perm) != [k for k in range(1, d + 1) if k != pivot]:
            _fail("perm", f"must order the variables 1..{d} other than the pivot {pivot}")
        perm0 = tuple(k - 1 for k in perm)
    else:
        perm0 = default_perm(d, pivot - 1)
    seed = _int(doc, "seed")
    if seed is not None and seed < 0:
        _fail("seed", "must be >= 0")
    return ModelFile(DmSpec(family, params, pivot - 1, perm0), seed, source)


def loads(text: str, source: str = "<string>") -> ModelFile:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise SpecParseError(f"{source}: not valid TOML: {exc}") from None
    return parse_spec(doc, source)


def load(path) -> ModelFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecParseError(f"cannot read spec file {path}: {exc.strerror}") from None
    return loads(text, str(path))
