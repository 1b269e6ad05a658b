"""``depmod`` command line: sample, gsi, select, reproduce.

Data goes to ``--out`` (or standard output); diagnostics go to standard
error. Exit status is 0 on success, 1 on a model or input error and 2 on
a usage error.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass
from typing import Sequence

from . import gsi
from .core import sample_batch
from .errors import DepmodError, UnsupportedAnalytic
from .registry import build_dm
from .specfile import ModelFile, load

ANALYTIC_FAMILIES = ("gaussian", "trapezoid")
REPRODUCE_TARGETS = ("gaussian_d3", "trapezoid")
DEFAULT_SEED = 0
DEFAULT_N = {"sample": 1000, "gsi": 2**16, "select": 2**16}


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    spec_path: str | None = None
    n: int | None = None
    seed: int | None = None
    out_path: str | None = None
    format: str = "csv"
    method: str | None = None
    target: str | None = None


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------


def fmt(value) -> str:
    """Scalar as text: floats with 17 significant digits, booleans in lowercase."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _toml_value(value) -> str:
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    text = fmt(value)
    if isinstance(value, float) and text in ("nan", "inf", "-inf"):
        return text
    if isinstance(value, float) and not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def csv_text(header: Sequence[str], rows, comments: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def kv_text(top: dict, table: str, entries: Sequence[dict], comments: Sequence[str] = ()) -> str:
    """TOML: top-level keys, then one [[table]] per entry."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    for k, v in top.items():
        buf.write(f"{k} = {_toml_value(v)}\n")
    for entry in entries:
        buf.write(f"\n[[{table}]]\n")
        for k, v in entry.items():
            buf.write(f"{k} = {_toml_value(v)}\n")
    return buf.getvalue()


def _emit(text: str, out_path: str | None):
    if out_path in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(out_path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _seed(cfg: CliConfig, mf: ModelFile | None = None) -> int:
    if cfg.seed is not None:
        return cfg.seed
    if mf is not None and mf.seed is not None:
        return mf.seed
    return DEFAULT_SEED


def cmd_sample(cfg: CliConfig) -> str:
    mf = load(cfg.spec_path)
    model = build_dm(mf.spec)
    seed = _seed(cfg, mf)
    batch = sample_batch(model, cfg.n or DEFAULT_N["sample"], seed)
    header = [f"x{k + 1}" for k in range(batch.d)]
    comments = [f"seed={seed}", f"spec-digest={mf.spec.digest()}", f"family={mf.spec.family}"]
    return csv_text(header, (map(float, row) for row in batch.values), comments)


def _method(cfg: CliConfig, family: str) -> str:
    if cfg.method is not None:
        if cfg.method == "analytic" and family not in ANALYTIC_FAMILIES:
            raise UnsupportedAnalytic(
                f"no analytic indices for family {family}; use --method pick_freeze"
            )
        return cfg.method
    return "analytic" if family in ANALYTIC_FAMILIES else "pick_freeze"


def gsi_reports(cfg: CliConfig) -> tuple:
    """One report per pivot of the spec's family, plus the seed used."""
    mf = load(cfg.spec_path)
    spec = mf.spec
    method = _method(cfg, spec.family)
    seed = _seed(cfg, mf)
    reports = []
    for j in range(spec.d):
        if method == "analytic":
            if spec.family == "gaussian":
                reports.append(gsi.gsi_gaussian_analytic(spec.params.get("mu"), spec.params["sigma"], pivot=j))
            else:
                reports.append(gsi.gsi_trapezoid_analytic(spec.params["beta"], f"r{j + 1}"))
        else:
            model = build_dm(mf.with_pivot(j))
            reports.append(gsi.gsi_pick_freeze(model, n=cfg.n or DEFAULT_N["gsi"], rng=seed))
    return reports, seed, mf


def cmd_gsi(cfg: CliConfig) -> str:
    reports, seed, mf = gsi_reports(cfg)
    rows = [r.as_dict() for r in reports]
    comments = [f"seed={seed}", f"spec-digest={mf.spec.digest()}", f"family={mf.spec.family}"]
    if cfg.format == "kv":
        return kv_text({}, "report", rows, comments)
    header = list(rows[0])
    return csv_text(header, ([row[k] for k in header] for row in rows), comments)


def cmd_select(cfg: CliConfig) -> str:
    reports, seed, mf = gsi_reports(cfg)
    result = gsi.select_efficient_dm(reports)
    top = result.as_dict()
    comments = [f"seed={seed}", f"spec-digest={mf.spec.digest()}", f"family={mf.spec.family}"]
    if cfg.format == "csv":
        header = list(top)
        return csv_text(header, [[top[k] for k in header]], comments)
    return kv_text(top, "report", [r.as_dict() for r in result.ranking], comments)


def cmd_reproduce(cfg: CliConfig) -> str:
    if cfg.target == "gaussian_d3":
        rows = gsi.reproduce_gaussian_d3()
    else:
        rows = gsi.reproduce_trapezoid()
    comments = [f"target={cfg.target}"]
    if cfg.format == "kv":
        return kv_text({}, "row", rows, comments)
    header = list(rows[0])
    return csv_text(header, ([row[k] for k in header] for row in rows), comments)


COMMANDS = {"sample": cmd_sample, "gsi": cmd_gsi, "select": cmd_select, "reproduce": cmd_reproduce}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _seed_arg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depmod", description="Sample dependency models and rank them by sensitivity indices."
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, spec=True, n=True, method=False, fmt_default="csv"):
        if spec:
            p.add_argument("--spec", required=True, dest="spec_path", help="model spec file (TOML)")
        if n:
            p.add_argument("--n", type=_positive_int, help="sample size")
        p.add_argument("--seed", type=_seed_arg, help="RNG seed (overrides the spec file)")
        p.add_argument("--out", dest="out_path", help="output file (default: standard output)")
        p.add_argument("--format", choices=("csv", "kv"), default=fmt_default)
        if method:
            p.add_argument("--method", choices=("analytic", "pick_freeze"))

    common(sub.add_parser("sample", help="draw rows from a model"))
    common(sub.add_parser("gsi", help="sensitivity indices for every pivot"), method=True)
    common(sub.add_parser("select", help="pick the efficient pivot"), method=True, fmt_default="kv")
    rep = sub.add_parser("reproduce", help="regenerate a reference table")
    rep.add_argument("target", choices=REPRODUCE_TARGETS)
    common(rep, spec=False, n=False)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = CliConfig(
        subcommand=args.subcommand,
        spec_path=getattr(args, "spec_path", None),
        n=getattr(args, "n", None),
        seed=args.seed,
        out_path=args.out_path,
        format=args.format,
        method=getattr(args, "method", None),
        target=getattr(args, "target", None),
    )
    try:
        text = COMMANDS[cfg.subcommand](cfg)
        _emit(text, cfg.out_path)
    except DepmodError as exc:
        print(f"depmod: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"depmod: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
