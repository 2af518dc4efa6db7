"""Command line entry point.

Usage::

    tonereserve <experiment-id> [--param value]... --out PATH --format csv|json --seed U64
    tonereserve --config FILE

Parameter values are parsed as JSON when possible (``--N [4,8]``,
``--delta 0.5``); a bare comma-separated value becomes a list
(``--N 4,8,16``).

Exit codes: 0 when every row passes, 1 when some row fails its check,
2 for invalid input or an unwritable output path, 3 for an internal defect
and 4 when a solver did not converge (rows are still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

from .experiments import REGISTRY, ParameterError, ResultRow, validate
from .walsh_tools import InternalInconsistencyError

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_INVALID = 2
EXIT_DEFECT = 3
EXIT_NONCONVERGED = 4
MAX_SEED = 2**64 - 1


class UsageError(Exception):
    pass


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    if "," in text:
        return [_parse_value(part) for part in text.split(",")]
    return text


def _parse_overrides(extra: list[str]) -> dict:
    out = {}
    i = 0
    while i < len(extra):
        key = extra[i]
        if not key.startswith("--") or len(key) == 2:
            raise UsageError(f"unexpected argument {key!r}")
        key = key[2:]
        if "=" in key:
            key, text = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(extra):
                raise UsageError(f"missing value for --{key}")
            text = extra[i + 1]
            i += 2
        out[key.replace("-", "_")] = _parse_value(text)
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tonereserve",
        allow_abbrev=False,
        description="Tone-reservation PAPR experiments.",
        epilog="experiments: " + ", ".join(REGISTRY),
    )
    parser.add_argument("experiment", nargs="?", help="experiment id")
    parser.add_argument("--out", help="output file")
    parser.add_argument("--format", choices=["csv", "json"], help="output format (default csv)")
    parser.add_argument("--seed", help="unsigned 64-bit seed")
    parser.add_argument("--config", help="JSON file with experiment, params, out, format and seed")
    parser.add_argument("--timing", action="store_true", help="record runtime_ms per experiment")
    return parser


def _resolve(args, overrides: dict) -> tuple[str, dict, str, str, int]:
    config = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(config, dict):
            raise UsageError("config must be a JSON object")
    experiment = args.experiment or config.get("experiment")
    params = dict(config.get("params", {}))
    params.update(overrides)
    out = args.out or config.get("out")
    fmt = args.format or config.get("format", "csv")
    seed = args.seed if args.seed is not None else config.get("seed")
    if not experiment:
        raise UsageError("no experiment given")
    if not out:
        raise UsageError("--out is required")
    if fmt not in ("csv", "json"):
        raise UsageError(f"unknown format {fmt!r}")
    if seed is None:
        raise UsageError("--seed is required")
    try:
        seed = int(seed)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"seed must be an integer, got {seed!r}") from exc
    if not 0 <= seed <= MAX_SEED:
        raise UsageError("seed must fit in an unsigned 64-bit integer")
    return experiment, params, out, fmt, seed


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def _format_scalar(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".17g")
    if isinstance(value, (list, dict)):
        return json.dumps(value, separators=(",", ":"))
    return str(value)


def _flatten(row: ResultRow) -> dict:
    flat = {"experiment": row.experiment}
    for group in ("params", "measured", "bound"):
        for key, value in getattr(row, group).items():
            flat[f"{group}.{key}"] = value
    flat["pass"] = row.passed
    flat["converged"] = row.converged
    flat["runtime_ms"] = row.runtime_ms
    return flat


def render(rows: list[ResultRow], fmt: str) -> str:
    """Serialise rows; the output depends only on the rows."""
    if not rows:
        raise ValueError("nothing to emit")
    if fmt == "json":
        return json.dumps([r.to_json() for r in rows], indent=2, allow_nan=True) + "\n"
    flats = [_flatten(r) for r in rows]
    header: list[str] = []
    for flat in flats:
        for key in flat:
            if key not in header:
                header.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for flat in flats:
        writer.writerow([_format_scalar(flat.get(key)) for key in header])
    return buf.getvalue()


def emit(rows: list[ResultRow], fmt: str, path: str) -> None:
    text = render(rows, fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _check_writable(path: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    if not os.path.isdir(directory):
        raise UsageError(f"output directory {directory} does not exist")
    if os.path.isdir(path):
        raise UsageError(f"{path} is a directory")
    if not os.access(directory, os.W_OK) or (os.path.exists(path) and not os.access(path, os.W_OK)):
        raise UsageError(f"{path} is not writable")


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    argv = sys.argv[1:] if argv is None else argv
    args, extra = parser.parse_known_args(argv)
    try:
        overrides = _parse_overrides(extra)
        experiment, params, out, fmt, seed = _resolve(args, overrides)
        params = validate(experiment, params)
        _check_writable(out)
    except (UsageError, ParameterError) as exc:
        print(f"tonereserve: error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    from .extension_solver import NonConvergenceError

    start = time.perf_counter()
    try:
        rows = REGISTRY[experiment].run(params, seed)
    except NonConvergenceError as exc:
        print(f"tonereserve: solver did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    except ParameterError as exc:
        print(f"tonereserve: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InternalInconsistencyError, Exception) as exc:  # noqa: BLE001
        print(f"tonereserve: internal defect: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DEFECT
    if args.timing:
        elapsed = (time.perf_counter() - start) * 1000 / max(1, len(rows))
        for row in rows:
            row.runtime_ms = elapsed
    if not rows:
        print("tonereserve: experiment produced no rows for these parameters", file=sys.stderr)
        return EXIT_INVALID
    try:
        emit(rows, fmt, out)
    except OSError as exc:
        print(f"tonereserve: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if not all(r.converged for r in rows):
        return EXIT_NONCONVERGED
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAILED_CHECK


if __name__ == "__main__":
    sys.exit(main())
