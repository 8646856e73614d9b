"""Batch front end: parse flags or a flat JSON config, run one pipeline,
write the report.

Exit codes: 0 success, 1 validation error (malformed config, bad bounds),
2 threshold breach in a check subcommand. The report is written even on a
breach, so CI can gate on the exit code alone.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields

from ._version import __version__
from ._kernels import set_threads
from .shifts import ShiftSet, tau_table
from .special import build_weight
from . import identities as _identities
from .correlation import CorrelationJob, correlation_rows
from .moments import I_report, _jsonify
from . import recipe as _recipe

SCHEMA_VERSION = 1
_SUBCOMMANDS = ("identities", "dirichlet-check", "correlation", "moment",
                "recipe", "table-build")
_MAX_THREADS = 64


class CLIError(ValueError):
    """Validation failure; main() maps it to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on bad usage; route through CLIError so
    # exit 2 stays reserved for threshold breaches
    def error(self, message):
        raise CLIError(message)


@dataclass
class RunConfig:
    """Resolved parameters for one run (flags merged over config file)."""

    subcommand: str
    schema_version: int = SCHEMA_VERSION
    shifts: str | list | None = None
    s: str | list | float = 1.0
    N: int = 10**6
    P: int = 10**4
    T: float | None = None
    X: int | None = None
    u: int | None = None
    h: str | list | None = None
    Q_cutoff: int = 200
    max_swaps: int | None = None
    n_max: int | None = None
    seed: int = 0
    draws: int = 100
    translation_draws: int = 50
    conjecture: bool = False
    threads: int | None = None
    output: str | None = None
    format: str | None = None  # resolved to csv for correlation, json otherwise

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise CLIError(f"{self.subcommand}: missing required parameter '{name}'")

    def validate(self):
        if self.schema_version != SCHEMA_VERSION:
            raise CLIError(f"unsupported schema_version {self.schema_version}")
        if self.format not in (None, "json", "csv"):
            raise CLIError(f"format must be json or csv, got {self.format!r}")
        for name, low in (("N", 16), ("P", 100), ("Q_cutoff", 1), ("draws", 1),
                          ("translation_draws", 1), ("u", 1), ("n_max", 1),
                          ("X", 1), ("max_swaps", 0)):
            v = getattr(self, name)
            if v is not None and v < low:
                raise CLIError(f"{name} must be >= {low}, got {v}")
        if self.T is not None and not self.T > 0:
            raise CLIError(f"T must be positive, got {self.T}")
        if self.threads is not None and not 1 <= self.threads <= _MAX_THREADS:
            raise CLIError(f"threads must be in 1..{_MAX_THREADS}")


def parse_complex(tok) -> complex:
    """Accept 12, -0.5, "0.01+0.02i" (i or j), or an [re, im] pair."""
    if isinstance(tok, (list, tuple)):
        if len(tok) != 2:
            raise CLIError(f"complex pair must be [re, im], got {tok!r}")
        return complex(float(tok[0]), float(tok[1]))
    if isinstance(tok, (int, float)):
        return complex(tok)
    text = str(tok).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(text)
    except ValueError:
        raise CLIError(f"cannot parse complex number {tok!r}") from None


def _parse_one_set(spec) -> ShiftSet:
    if isinstance(spec, str):
        toks = [t for t in spec.split(",") if t.strip()]
    elif isinstance(spec, (list, tuple)):
        toks = list(spec)
    else:
        raise CLIError(f"cannot parse shift set {spec!r}")
    if not toks:
        raise CLIError("shift set is empty")
    try:
        return ShiftSet([parse_complex(t) for t in toks])
    except ValueError as exc:
        raise CLIError(f"invalid shifts: {exc}") from None


def parse_shift_sets(spec, expect: int = 2):
    """One or two shift sets; ';' separates sets in the string form, and a
    single set stands for both when two are expected."""
    if spec is None:
        raise CLIError("missing required parameter 'shifts'")
    if isinstance(spec, str):
        groups = [g for g in spec.split(";") if g.strip()]
    elif isinstance(spec, (list, tuple)) and spec and all(
            isinstance(g, (list, tuple)) and g and all(
                isinstance(t, (list, tuple, str, int, float)) for t in g)
            and not (len(g) == 2 and all(isinstance(t, (int, float)) for t in g))
            for g in spec):
        groups = list(spec)
    else:
        groups = [spec]
    if expect == 1:
        if len(groups) != 1:
            raise CLIError(f"expected one shift set, got {len(groups)}")
        return _parse_one_set(groups[0])
    if len(groups) == 1:
        A = _parse_one_set(groups[0])
        return A, A
    if len(groups) != 2:
        raise CLIError(f"expected two shift sets separated by ';', got {len(groups)}")
    return _parse_one_set(groups[0]), _parse_one_set(groups[1])


def parse_h_list(spec) -> tuple[int, ...]:
    """"1..8", "1,2,5", a single int, or a JSON list."""
    if spec is None:
        raise CLIError("missing required parameter 'h'")
    if isinstance(spec, int):
        return (spec,)
    if isinstance(spec, (list, tuple)):
        return tuple(int(v) for v in spec)
    text = str(spec).strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise CLIError(f"empty h range {text!r}")
            return tuple(range(lo, hi + 1))
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise CLIError(f"cannot parse h list {spec!r}") from None


def _build_parser() -> _Parser:
    parser = _Parser(prog="zmw", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="|".join(_SUBCOMMANDS))

    def common(sp):
        sp.add_argument("--config", help="flat JSON config file; flags override it")
        sp.add_argument("--threads", type=int)
        sp.add_argument("--output", help="report path (default: stdout)")
        sp.add_argument("--format", choices=("json", "csv"))

    sp = sub.add_parser("identities", help="seeded identity suites")
    common(sp)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--draws", type=int)
    sp.add_argument("--translation-draws", dest="translation_draws", type=int)
    sp.add_argument("--p-cutoff", dest="P", type=int, help="prime cutoff for the global translation check")

    sp = sub.add_parser("dirichlet-check", help="series vs Euler product")
    common(sp)
    sp.add_argument("--shifts", help="A or A;B, entries comma separated")
    sp.add_argument("--s", help="series offset, Re s >= 1")
    sp.add_argument("--n", dest="N", type=int, help="series truncation")
    sp.add_argument("--p-cutoff", dest="P", type=int, help="prime product truncation")

    sp = sub.add_parser("correlation", help="shifted convolution vs its density")
    common(sp)
    sp.add_argument("--shifts", help="A;B")
    sp.add_argument("--u", type=int, help="correlation length")
    sp.add_argument("--h", help="offsets: 1..8 or 1,2,5")
    sp.add_argument("--q-cutoff", dest="Q_cutoff", type=int)

    sp = sub.add_parser("moment", help="mean square of the divisor polynomial vs prediction")
    common(sp)
    sp.add_argument("--shifts", help="A;B")
    sp.add_argument("--t", dest="T", type=float, help="sample scale")
    sp.add_argument("--x", dest="X", type=int, help="polynomial length")
    sp.add_argument("--p-cutoff", dest="P", type=int)
    sp.add_argument("--conjecture", action="store_true", default=None,
                    help="skip the empirical side")

    sp = sub.add_parser("recipe", help="swap-term breakdown of the prediction")
    common(sp)
    sp.add_argument("--shifts", help="A;B")
    sp.add_argument("--t", dest="T", type=float)
    sp.add_argument("--p-cutoff", dest="P", type=int)
    sp.add_argument("--max-swaps", dest="max_swaps", type=int)

    sp = sub.add_parser("table-build", help="write a divisor-sum table file")
    common(sp)
    sp.add_argument("--shifts", help="one shift set")
    sp.add_argument("--n-max", dest="n_max", type=int)

    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    known = {f.name for f in fields(RunConfig)}
    if getattr(args, "config", None):
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise CLIError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise CLIError(f"{args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise CLIError(f"{args.config}: top level must be an object")
        for key, value in raw.items():
            if key == "subcommand":
                if value != args.subcommand:
                    raise CLIError(f"config is for '{value}', not '{args.subcommand}'")
                continue
            if key not in known:
                raise CLIError(f"{args.config}: unknown field '{key}'")
            setattr(cfg, key, value)
    for key, value in vars(args).items():
        if key in known and value is not None:
            setattr(cfg, key, value)
    if os.environ.get("ZMW_THREADS"):
        try:
            cfg.threads = int(os.environ["ZMW_THREADS"])
        except ValueError:
            raise CLIError(f"ZMW_THREADS is not an integer: {os.environ['ZMW_THREADS']!r}") from None
    cfg.validate()
    if cfg.format is None:
        cfg.format = "csv" if cfg.subcommand == "correlation" else "json"
    return cfg


def _echo(cfg: RunConfig) -> dict:
    return _jsonify(asdict(cfg))


def _wrap(cfg: RunConfig, body: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "version": __version__,
            "config": _echo(cfg), **body}


def _run_identities(cfg: RunConfig):
    suite = _identities.identity_suite(seed=cfg.seed, draws=cfg.draws)
    tsuite = _identities.translation_suite(seed=cfg.seed, draws=cfg.translation_draws, P=cfg.P)
    ok = suite.ok and tsuite.ok
    payload = _wrap(cfg, {
        "ok": ok,
        "max_residual": max(suite.max_residual, tsuite.max_residual),
        "identity_suite": suite.payload(),
        "translation_suite": tsuite.payload(),
    })
    return (0 if ok else 2), payload


def _run_dirichlet(cfg: RunConfig):
    A, B = parse_shift_sets(cfg.shifts)
    result = _identities.check_dirichlet_series(A, B, parse_complex(cfg.s), cfg.N, cfg.P)
    return (0 if result.ok else 2), _wrap(cfg, {"ok": result.ok, "check": result.payload()})


def _run_correlation(cfg: RunConfig):
    cfg.require("u", "h")
    A, B = parse_shift_sets(cfg.shifts)
    job = CorrelationJob(A, B, u_max=cfg.u, h_list=parse_h_list(cfg.h), Q_cutoff=cfg.Q_cutoff)
    rows = correlation_rows(job)
    return 0, _wrap(cfg, {"rows": rows})


def _run_moment(cfg: RunConfig):
    cfg.require("T", "X")
    A, B = parse_shift_sets(cfg.shifts)
    weight = build_weight()
    if cfg.conjecture:
        tables = (tau_table(A, cfg.X), tau_table(B, cfg.X))
        conj = _recipe.conjectured_detail(A, B, cfg.T, cfg.X, weight, cfg.P, tables)
        body = {
            "conjectured": conj.value,
            "breakdown": {
                "diagonal": conj.diagonal,
                "one_swap": {f"{ah:g}|{bh:g}": v for ah, bh, v in conj.swaps},
                "swap_total": conj.swap_total(),
            },
            "error_estimates": [{"label": "one_swap_remainder", "value": conj.remainder_est}],
        }
        return 0, _wrap(cfg, _jsonify(body))
    report = I_report(A, B, cfg.T, cfg.X, weight, cfg.P)
    return 0, _wrap(cfg, {"report": report.payload()})


def _run_recipe(cfg: RunConfig):
    cfg.require("T")
    A, B = parse_shift_sets(cfg.shifts)
    max_swaps = min(len(A), len(B)) if cfg.max_swaps is None else cfg.max_swaps
    weight = build_weight()
    terms = _recipe.recipe_terms(A, B, cfg.T, weight, cfg.P, max_swaps)
    total = sum(t["value"] for t in terms)
    return 0, _wrap(cfg, _jsonify({"total": total, "terms": terms}))


def _run_table_build(cfg: RunConfig):
    cfg.require("n_max")
    if not cfg.output:
        raise CLIError("table-build: --output is required (binary table path)")
    A = parse_shift_sets(cfg.shifts, expect=1)
    table = tau_table(A, cfg.n_max)
    table.to_file(cfg.output)
    payload = _wrap(cfg, {
        "path": cfg.output,
        "n_max": table.n_max,
        "bytes": os.path.getsize(cfg.output),
    })
    return 0, payload


_HANDLERS = {
    "identities": _run_identities,
    "dirichlet-check": _run_dirichlet,
    "correlation": _run_correlation,
    "moment": _run_moment,
    "recipe": _run_recipe,
    "table-build": _run_table_build,
}

_CSV_COLUMNS = ("u", "h", "D_real", "D_imag", "m_real", "m_imag", "rel_dev")


def _render(cfg: RunConfig, payload: dict) -> str:
    if cfg.format == "csv":
        if cfg.subcommand != "correlation":
            raise CLIError(f"csv output is only defined for correlation, not {cfg.subcommand}")
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=_CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in payload["rows"]:
            writer.writerow({k: row[k] for k in _CSV_COLUMNS})
        return buf.getvalue()
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _load_config(args)
        if cfg.threads is not None:
            set_threads(cfg.threads)
        code, payload = _HANDLERS[cfg.subcommand](cfg)
        text = _render(cfg, payload)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if cfg.output and cfg.subcommand != "table-build":
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
