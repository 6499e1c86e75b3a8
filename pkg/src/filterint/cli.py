"""Command line scenario runner.

Runs one named scenario and emits its report as CSV or JSON.  Reports
are deterministic for a fixed configuration, failures surface as a
structured error row with a nonzero exit code, and output files are
written atomically.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile

from .backend import Rat
from .config import get_config
from .scenarios import COLUMNS, run_scenario, scenario_names

# keys a config file may override; everything the flags cover
_CONFIG_KEYS = ("scenario", "level", "seed", "tol", "trunc", "format", "out")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="filterint",
        description="run a named filter-integration scenario")
    p.add_argument("--scenario", required=True,
                   help="one of: " + ", ".join(scenario_names()))
    p.add_argument("--level", type=int, default=None,
                   help="evaluation level (scenario default otherwise)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", default=None, metavar="p/q",
                   help="target tolerance as a rational")
    p.add_argument("--trunc", type=int, default=None,
                   help="series truncation order")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--config", default=None,
                   help="JSON file whose entries override same-name flags")
    return p


def apply_config_file(args, path):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    for key, value in data.items():
        if key not in _CONFIG_KEYS:
            raise ValueError(f"unknown config key {key!r}")
        setattr(args, key, value)
    return args


def _parse_tol(text):
    if text is None:
        return None
    tol = Rat(str(text))
    if tol <= 0:
        raise ValueError("tol must be positive")
    return tol


def _error_row(scenario, level, message):
    return {
        "scenario": scenario or "",
        "quantity": "error",
        "level": "" if level is None else str(level),
        "lower": "",
        "upper": "",
        "certified": "false",
        "expected": message,
        "provenance": "error",
    }


def collect_rows(args):
    """(rows, exit_code) for a parsed configuration; never raises."""
    scenario = args.scenario
    level = args.level
    try:
        if args.trunc is not None:
            if args.trunc < 1:
                raise ValueError("trunc must be positive")
            get_config().truncation_order = args.trunc
        tol = _parse_tol(args.tol)
        if args.seed < 0:
            raise ValueError("seed must be nonnegative")
        rows = run_scenario(scenario, level=level, seed=args.seed, tol=tol)
        return rows, 0
    except KeyError:
        known = ", ".join(scenario_names())
        return [_error_row(scenario, level,
                           f"unknown scenario; known: {known}")], 2
    except (ValueError, RuntimeError, TypeError) as exc:
        return [_error_row(scenario, level, str(exc))], 1


def render(rows, fmt) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def write_atomic(path, text):
    """Write through a sibling temp file so readers never see a torn file."""
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target),
                               prefix=".filterint-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    code = 0
    if args.config is not None:
        try:
            args = apply_config_file(args, args.config)
        except (OSError, ValueError, json.JSONDecodeError) as exc:
            rows, code = [_error_row(args.scenario, args.level,
                                     f"bad config file: {exc}")], 1
    if code == 0 and args.format not in ("csv", "json"):
        rows, code = [_error_row(args.scenario, args.level,
                                 f"unknown format {args.format!r}")], 1
        args.format = "csv"
    if code == 0:
        rows, code = collect_rows(args)
    text = render(rows, args.format)
    if args.out is None:
        sys.stdout.write(text)
    else:
        write_atomic(args.out, text)
    return code


if __name__ == "__main__":
    sys.exit(main())
