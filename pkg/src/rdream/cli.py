"""Command-line interface: ``rdream test``, ``rdream simulate`` and
``rdream sensitivity``.

Exit codes: 0 success, 2 input error, 3 numeric degeneracy, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .data import Dataset, exponential_link, linear_link, validate_dataset
from .errors import AllRowsDropped, DataFileNotFound, InputError, MissingColumn, NumericError
from .pipeline import METHODS, evaluate_methods, sensitivity_curve
from .reporting import emit_report, record_to_csv, record_to_json
from .robust import HuberConfig
from .simulation import (
    FAMILIES,
    LOGNORMAL,
    NORMAL,
    ScenarioSpec,
    default_contamination,
    resolve_threads,
    run_monte_carlo,
)
from .statistic import DEFAULT_LEVELS

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3
EXIT_INTERNAL = 4

FULL_REPS = 2000
DESK_REPS = 500

log = logging.getLogger("rdream")


@dataclass(frozen=True)
class IngestSummary:
    path: str
    rows_read: int
    rows_dropped: int
    response: str
    covariates: tuple


def ingest_csv(path, response, covariates=None):
    """Read a UTF-8 CSV with a header row into a Dataset.

    Rows with a missing or non-numeric cell in any used column are dropped
    and counted. ``covariates`` defaults to every column but the response.
    """
    path = Path(path)
    if not path.is_file():
        raise DataFileNotFound(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InputError(f"{path} is empty")
        header = [h.strip() for h in header]
        if covariates is None:
            covariates = [h for h in header if h != response]
        for name in [response, *covariates]:
            if name not in header:
                raise MissingColumn(name, path)
        cols = [header.index(response)] + [header.index(c) for c in covariates]
        rows, read, dropped = [], 0, 0
        for rec in reader:
            if not rec:
                continue
            read += 1
            try:
                vals = [float(rec[k]) for k in cols]
            except (IndexError, ValueError):
                dropped += 1
                continue
            if not all(math.isfinite(v) for v in vals):
                dropped += 1
                continue
            rows.append(vals)
    if not rows:
        raise AllRowsDropped(path, dropped)
    arr = np.array(rows)
    d = validate_dataset(arr[:, 0], arr[:, 1:])
    return d, IngestSummary(str(path), read, dropped, response, tuple(covariates))


def preprocess(d: Dataset) -> Dataset:
    """Standardize each covariate separately and center the response."""
    x = d.x
    sd = x.std(axis=0, ddof=1)
    if np.any(sd == 0):
        raise InputError(f"constant covariate column(s) {np.flatnonzero(sd == 0).tolist()}")
    return validate_dataset(d.y - d.y.mean(), (x - x.mean(axis=0)) / sd)


def load_link(arg):
    """``linear``, ``exponential`` or a JSON file such as
    ``{"link": "exponential", "theta_start": [2.5, 0.5]}``."""
    if arg in (None, "linear"):
        return linear_link(), {"link": "linear"}
    if arg == "exponential":
        return exponential_link(), {"link": "exponential", "theta_start": [1.0, 1.0]}
    path = Path(arg)
    if not path.is_file():
        raise InputError(f"link must be 'linear', 'exponential' or a JSON file; {arg} not found")
    try:
        spec = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read link file {path}: {exc}") from exc
    kind = spec.get("link")
    if kind == "linear":
        return linear_link(), {"link": "linear"}
    if kind == "exponential":
        start = [float(v) for v in spec.get("theta_start", [1.0, 1.0])]
        if len(start) != 2:
            raise InputError(f"exponential link needs two starting values in {path}")
        return exponential_link(*start), {"link": "exponential", "theta_start": start}
    raise InputError(f"unknown link {kind!r} in {path}")


def _split(tokens, convert, what, allowed=None):
    out = []
    for group in tokens:
        for tok in str(group).split(","):
            tok = tok.strip()
            if not tok:
                continue
            try:
                val = convert(tok)
            except ValueError:
                raise InputError(f"invalid {what} {tok!r}") from None
            if allowed is not None and val not in allowed:
                raise InputError(f"unknown {what} {tok!r}; expected one of {', '.join(map(str, allowed))}")
            out.append(val)
    if not out:
        raise InputError(f"no {what} given")
    return out


def _method(tok):
    return tok.lower()


def _family(tok):
    return tok.upper()


def _nonneg_float(tok):
    v = float(tok)
    if not (math.isfinite(v) and v >= 0):
        raise ValueError(tok)
    return v


def _pos_int(tok):
    v = int(tok)
    if v < 1:
        raise ValueError(tok)
    return v


def _check_alpha(alpha):
    if not 0 < alpha < 1:
        raise InputError(f"alpha must be in (0, 1), got {alpha}")


def _format_for(path, fmt):
    if fmt:
        return fmt
    return "json" if path and Path(path).suffix == ".json" else "csv" if path else "json"


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


# -- test -------------------------------------------------------------------


def cmd_test(args) -> int:
    _check_alpha(args.alpha)
    if args.bandwidth is not None and not args.bandwidth > 0:
        raise InputError("--bandwidth must be positive")
    if args.q is not None and args.q < 1:
        raise InputError("--q must be at least 1")
    covariates = _split(args.covariates, str, "covariate") if args.covariates else None
    methods = _split(args.method, _method, "method", METHODS)
    link, link_cfg = load_link(args.link)
    d, summary = ingest_csv(args.data, args.response, covariates)
    if summary.rows_dropped:
        log.warning("dropped %d of %d rows with missing or non-numeric cells",
                    summary.rows_dropped, summary.rows_read)
    if args.preprocess:
        d = preprocess(d)
    levels = tuple(sorted(set(DEFAULT_LEVELS) | {args.alpha}))
    reports = evaluate_methods(d, methods, link, HuberConfig(), h=args.bandwidth, q_hat=args.q,
                               gwz_sdr=args.gwz_sdr, levels=levels)
    config = {
        "command": "test",
        "data": summary.path,
        "response": summary.response,
        "covariates": list(summary.covariates),
        "methods": methods,
        "alpha": args.alpha,
        "bandwidth": args.bandwidth,
        "q": args.q,
        "preprocess": args.preprocess,
        "gwz_sdr": args.gwz_sdr,
        "huber_k": HuberConfig().tuning_k,
        "version": __version__,
        **link_cfg,
    }
    record = {"rows_read": summary.rows_read, "rows_dropped": summary.rows_dropped, "n": d.n}
    degenerate = False
    for m in methods:
        rep = reports[m]
        degenerate |= rep.degenerate
        for key, value in rep.to_record().items():
            if key in ("method", "n"):
                continue
            record[f"{m}.{key}" if len(methods) > 1 else key] = value
        if len(methods) > 1:
            record[f"{m}.reject"] = None if rep.degenerate else bool(rep.p_value <= args.alpha)
        else:
            record["method"] = m
            record["reject"] = None if rep.degenerate else bool(rep.p_value <= args.alpha)
    fmt = _format_for(args.output, args.format)
    text = record_to_json(record, config) if fmt == "json" else record_to_csv(record, config)
    _write(text, args.output)
    if degenerate:
        log.error("variance estimate degenerate; no p-value available")
        return EXIT_NUMERIC
    return EXIT_OK


# -- simulate ---------------------------------------------------------------


def build_grid(args):
    families = _split(args.family, _family, "family", FAMILIES)
    a_list = _split(args.a, _nonneg_float, "departure value")
    n_list = _split(args.n, _pos_int, "sample size")
    errors = _split(args.error, str.lower, "error distribution", (NORMAL, LOGNORMAL))
    p_list = _split(args.p, _pos_int, "dimension") if args.p else [None]
    rho_list = _split(args.rho, _nonneg_float, "contamination rate") if args.rho else [None]
    grid = []
    for fam in families:
        for p in p_list:
            for err in errors:
                for rho in rho_list:
                    cont = default_contamination(fam, rho)
                    for n in n_list:
                        for a in a_list:
                            try:
                                grid.append(ScenarioSpec(fam, a, n, p, err, cont))
                            except ValueError as exc:
                                raise InputError(str(exc)) from None
    return grid


def cmd_simulate(args) -> int:
    _check_alpha(args.alpha)
    methods = _split(args.method, _method, "method", METHODS)
    reps = FULL_REPS if args.full else args.reps
    if reps < 1:
        raise InputError("--reps must be at least 1")
    grid = build_grid(args)
    threads = resolve_threads(args.threads)
    table = run_monte_carlo(grid, methods, reps, args.alpha, args.seed, threads, args.gwz_sdr)
    table.config["command"] = "simulate"
    table.config["version"] = __version__
    fmt = _format_for(args.output, args.format)
    if args.output is None:
        from .reporting import table_to_csv, table_to_json

        _write(table_to_json(table) if fmt == "json" else table_to_csv(table), None)
    else:
        try:
            emit_report(table, fmt, args.output)
        except OSError as exc:
            raise InputError(str(exc)) from exc
    return EXIT_OK


# -- sensitivity --------------------------------------------------------------


def signed_log_grid(lo, hi, points):
    """Zero plus ``points`` values on each side spaced log-uniformly up to the
    grid bounds, starting at 0.1."""
    out = [0.0]
    if hi > 0:
        out += list(np.logspace(-1, np.log10(hi), points))
    if lo < 0:
        out += list(-np.logspace(-1, np.log10(-lo), points))
    return np.array(sorted(v for v in out if lo <= v <= hi))


def cmd_sensitivity(args) -> int:
    covariates = _split(args.covariates, str, "covariate") if args.covariates else None
    methods = _split(args.method, _method, "method", METHODS)
    if not args.y_min < args.y_max:
        raise InputError("--y-min must be below --y-max")
    link, link_cfg = load_link(args.link)
    d, summary = ingest_csv(args.data, args.response, covariates)
    if args.preprocess:
        d = preprocess(d)
    if not 0 <= args.index < d.n:
        raise InputError(f"--index must be in [0, {d.n - 1}]")
    grid = signed_log_grid(args.y_min, args.y_max, args.points)
    rows = []
    for m in methods:
        curve = sensitivity_curve(d, m, args.index, grid, link, args.quantity,
                                  h=args.bandwidth, q_hat=args.q)
        rows += [(float(x), float(v), m) for x, v in zip(grid, curve)]
    config = {
        "command": "sensitivity",
        "data": summary.path,
        "response": summary.response,
        "covariates": list(summary.covariates),
        "methods": methods,
        "index": args.index,
        "y_min": args.y_min,
        "y_max": args.y_max,
        "points": args.points,
        "quantity": args.quantity,
        "bandwidth": args.bandwidth,
        "q": args.q,
        "preprocess": args.preprocess,
        "version": __version__,
        **link_cfg,
    }
    fmt = _format_for(args.output, args.format)
    if fmt == "json":
        doc = {"config": config, "columns": ["x", "y", "series"],
               "rows": [[x, y if math.isfinite(y) else repr(y), s] for x, y, s in rows]}
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["# rdream sensitivity curve", "# config: " + json.dumps(config, sort_keys=True),
                 "x,y,series"]
        lines += [f"{x!r},{y!r},{s}" for x, y, s in rows]
        text = "\n".join(lines) + "\n"
    _write(text, args.output)
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _add_data_args(p):
    p.add_argument("--data", required=True, help="CSV file with a header row")
    p.add_argument("--response", default="y", help="response column (default: y)")
    p.add_argument("--covariates", action="append",
                   help="comma-separated covariate columns (default: all but the response)")
    p.add_argument("--link", default="linear",
                   help="'linear', 'exponential' or a JSON link file")
    p.add_argument("--no-preprocess", dest="preprocess", action="store_false",
                   help="skip standardizing covariates and centering the response")
    p.add_argument("--bandwidth", type=float, default=None, help="override the test bandwidth")
    p.add_argument("--q", type=int, default=None, help="override the structural dimension")
    p.add_argument("--output", default=None, help="report path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None,
                   help="report format (default: from the output suffix, else json)")


def build_parser():
    parser = argparse.ArgumentParser(prog="rdream", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rdream {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="run a lack-of-fit test on a CSV file")
    _add_data_args(t)
    t.add_argument("--method", action="append", default=None,
                   help=f"one or more of {', '.join(METHODS)} (default: opg)")
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--gwz-sdr", choices=("opg", "dee"), default="dee")
    t.add_argument("--seed", type=int, default=0, help="accepted for symmetry; the test is deterministic")
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="Monte Carlo size and power study")
    s.add_argument("--family", action="append", required=True, help="e.g. H11 or H11,H21")
    s.add_argument("--a", action="append", default=None, help="departure values (default: 0)")
    s.add_argument("--n", action="append", default=None, help="sample sizes (default: 100)")
    s.add_argument("--p", action="append", default=None, help="covariate dimensions (default: per family)")
    s.add_argument("--error", action="append", default=None, help="normal and/or lognormal (default: normal)")
    s.add_argument("--rho", action="append", default=None,
                   help="contamination rates (default: 0.1 for H1/H2, 0 for H3)")
    s.add_argument("--method", action="append", default=None, help="methods (default: opg,dee)")
    s.add_argument("--reps", type=int, default=DESK_REPS)
    s.add_argument("--full", action="store_true", help=f"use {FULL_REPS} replications")
    s.add_argument("--seed", type=int, default=0, help="seed base")
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--threads", type=int, default=None, help="worker processes (default: $RDREAM_THREADS or 1)")
    s.add_argument("--gwz-sdr", choices=("opg", "dee"), default="dee")
    s.add_argument("--output", default=None)
    s.add_argument("--format", choices=("csv", "json"), default=None)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("sensitivity", help="statistic as one response sweeps a grid")
    _add_data_args(v)
    v.add_argument("--method", action="append", default=None, help="methods (default: opg,gwz)")
    v.add_argument("--index", type=int, default=0, help="row whose response is varied")
    v.add_argument("--y-min", type=float, default=-1e6)
    v.add_argument("--y-max", type=float, default=1e6)
    v.add_argument("--points", type=int, default=15, help="grid points on each side of zero")
    v.add_argument("--quantity", choices=("statistic", "functional"), default="statistic",
                   help="trace the standardized statistic or the raw double sum")
    v.set_defaults(func=cmd_sensitivity)
    return parser


_DEFAULT_LISTS = {
    "test": {"method": ["opg"]},
    "simulate": {"a": ["0"], "n": ["100"], "error": [NORMAL], "method": ["opg,dee"]},
    "sensitivity": {"method": ["opg,gwz"]},
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in _DEFAULT_LISTS[args.command].items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="rdream: %(levelname)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"rdream: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericError as exc:
        print(f"rdream: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # noqa: BLE001
        print(f"rdream: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
