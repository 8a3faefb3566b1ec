"""Command-line front end: ``gausschan {capacity,fiber,eof,scan,verify}``.

Exit codes: 0 success, 2 usage error, 3 invalid input data, 4 numerical failure.

CSV headers
  capacity: kind,eta,c,N,value_bits,reason
  fiber:    length,absorption_length,kind,eta,c,N,value_bits,reason
  scan:     seed,sample,kind,r1,noise1,r2,noise2,lambda,alpha,channel,residual_bits,restarts,flag
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from typing import Optional, Sequence

import numpy as np

from . import additivity, capacities, verify
from . import symplectic as sp
from .channels import classical_noise, fiber_transmittivity, lossy
from .eof import EoFError, gaussian_eof
from .states import Bipartition

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
FMT = ".12g"

SCAN_KINDS = {"superadd": "superadditivity", "convexity": "convexity", "moe": "moe_additivity"}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _num(v):
    if v is None:
        return None
    if isinstance(v, bool):
        return v
    if isinstance(v, float):
        return float(format(v, FMT))
    return v


def _clean(obj):
    """Round floats to 12 significant digits for JSON output."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return _num(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True)


# --- matrix files -----------------------------------------------------------


def parse_matrix_text(text: str, source: str = "<input>") -> np.ndarray:
    """Parse ``n=<modes>`` followed by ``2n`` rows, or a JSON matrix document.

    JSON may be a bare nested list or an object with a ``gamma`` entry. Blank
    lines and ``#`` comments are ignored in the plain format.
    """
    stripped = text.strip()
    if stripped.startswith("[") or stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise DataError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        rows = doc.get("gamma") if isinstance(doc, dict) else doc
        try:
            m = np.array(rows, dtype=float)
        except (TypeError, ValueError):
            raise DataError(f"{source}: 'gamma' must be a numeric 2-d array") from None
        if m.ndim != 2:
            raise DataError(f"{source}: 'gamma' must be a numeric 2-d array")
        return m

    lines = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln]
    if not lines:
        raise DataError(f"{source}: empty matrix file")
    lineno, head = lines[0]
    key, _, val = head.partition("=")
    if key.strip() != "n" or not val.strip().isdigit() or int(val) < 1:
        raise DataError(f"{source}: line {lineno}: expected header 'n=<modes>', got {head!r}")
    dim = 2 * int(val)
    body = lines[1:]
    if len(body) != dim:
        where = body[dim][0] if len(body) > dim else (body[-1][0] if body else lineno)
        raise DataError(f"{source}: line {where}: expected {dim} matrix rows, found {len(body)}")
    rows = []
    for lineno, ln in body:
        parts = ln.replace(",", " ").split()
        if len(parts) != dim:
            raise DataError(f"{source}: line {lineno}: expected {dim} entries, found {len(parts)}")
        try:
            rows.append([float(x) for x in parts])
        except ValueError as exc:
            raise DataError(f"{source}: line {lineno}: {exc}") from None
    return np.array(rows)


def read_covariance(path: str) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    gamma = parse_matrix_text(text, path)
    if gamma.shape[0] != gamma.shape[1] or gamma.shape[0] % 2:
        raise DataError(f"{path}: matrix must be square with even dimension, got {gamma.shape}")
    if not np.all(np.isfinite(gamma)):
        raise DataError(f"{path}: non-finite matrix entry")
    if not sp.is_valid_covariance(gamma):
        raise DataError(f"{path}: not a valid covariance matrix (gamma + i sigma must be PSD)")
    return 0.5 * (gamma + gamma.T)


def write_matrix_text(gamma: np.ndarray) -> str:
    n = gamma.shape[0] // 2
    rows = [" ".join(format(float(x), FMT) for x in row) for row in gamma]
    return "\n".join([f"n={n}", *rows]) + "\n"


# --- sweeps -----------------------------------------------------------------


def parse_sweep(spec: str, allowed: Sequence[str]):
    try:
        name, lo, hi, steps = spec.split(":")
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        raise UsageError(f"--sweep expects param:lo:hi:steps, got {spec!r}") from None
    if name not in allowed:
        raise UsageError(f"--sweep parameter must be one of {', '.join(allowed)}, got {name!r}")
    if steps < 1:
        raise UsageError(f"--sweep needs steps >= 1, got {steps}")
    values = [lo] if steps == 1 else list(np.linspace(lo, hi, steps))
    return name, [float(v) for v in values]


def _check_range(name: str, value: float, lo: float, hi: Optional[float] = None, lo_open: bool = False):
    bad = value <= lo if lo_open else value < lo
    if hi is not None:
        bad = bad or value > hi
    if bad or not np.isfinite(value):
        left = "(" if lo_open else "["
        right = f"{hi:g}]" if hi is not None else "inf)"
        raise UsageError(f"--{name} must lie in {left}{lo:g}, {right}, got {value:g}")


def _capacity_point(channel: str, eta: float, c: float, photons: float, y: Optional[float]):
    _check_range("photons", photons, 0.0)
    if channel == "lossy":
        _check_range("eta", eta, 0.0, 1.0)
    elif channel == "thermal":
        _check_range("eta", eta, 0.0, 1.0)
        _check_range("c", c, 1.0)
    elif channel == "amplifier":
        _check_range("eta", eta, 1.0, lo_open=True)
        _check_range("c", c, 1.0)
    elif channel == "classical":
        if y is None:
            raise UsageError("--channel classical needs --y (noise variance)")
        _check_range("y", y, 0.0)
    return capacities.capacity_reports(channel, eta, c, photons, y)


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, FMT)
    return str(v)


def _emit_table(rows: list[dict], columns: Sequence[str], fmt: str, out) -> None:
    if fmt == "json":
        out.write(_dump_json(rows) + "\n")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(k)) for k in columns])
    out.write(buf.getvalue())


# --- commands ---------------------------------------------------------------


def cmd_capacity(args, out) -> int:
    params = {"eta": args.eta, "c": args.c, "photons": args.photons, "y": args.y}
    points = [dict(params)]
    if args.sweep:
        name, values = parse_sweep(args.sweep, ("eta", "c", "photons", "y"))
        points = [dict(params, **{name: v}) for v in values]
    rows = []
    for pt in points:
        for rep in _capacity_point(args.channel, pt["eta"], pt["c"], pt["photons"], pt["y"]):
            row = rep.row()
            if args.format == "json":
                row["channel"] = args.channel
            rows.append(row)
    _emit_table(rows, capacities.CSV_COLUMNS, args.format, out)
    return EXIT_OK


def cmd_fiber(args, out) -> int:
    _check_range("absorption-length", args.absorption_length, 0.0, lo_open=True)
    _check_range("temperature-c", args.temperature_c, 1.0)
    lengths = [args.length]
    if args.sweep:
        _, lengths = parse_sweep(args.sweep, ("length",))
    rows = []
    for length in lengths:
        _check_range("length", length, 0.0)
        eta = fiber_transmittivity(length, args.absorption_length)
        family = "lossy" if args.temperature_c == 1.0 else "thermal"
        for rep in _capacity_point(family, eta, args.temperature_c, args.photons, None):
            row = {"length": length, "absorption_length": args.absorption_length, **rep.row()}
            rows.append(row)
    _emit_table(rows, ("length", "absorption_length", *capacities.CSV_COLUMNS), args.format, out)
    return EXIT_OK


def cmd_eof(args, out) -> int:
    gamma = read_covariance(args.gamma)
    n = gamma.shape[0] // 2
    try:
        part = Bipartition.parse(args.partition) if args.partition else Bipartition((0,), tuple(range(1, n)))
        part.check(n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.restarts < 1:
        raise UsageError("--restarts must be >= 1")
    try:
        res = gaussian_eof(gamma, part, restarts=args.restarts, seed=args.seed, method=args.method)
    except (EoFError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out.write(_dump_json(res.to_dict()) + "\n")
    return EXIT_OK


def cmd_scan(args, out) -> int:
    kind = SCAN_KINDS[args.kind]
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    channel = None
    if kind == "moe_additivity":
        if args.channel == "lossy":
            _check_range("eta", args.eta, 0.0, 1.0)
            channel = lossy(args.eta)
        else:
            _check_range("y", args.y, 0.0)
            channel = classical_noise(args.y)
        if not args.alpha > 1:
            raise UsageError(f"--alpha must exceed 1, got {args.alpha}")
    if args.threshold == "calibrate":
        threshold = additivity.calibrated_threshold(seed=args.seed, restarts=args.restarts)
    else:
        try:
            threshold = float(args.threshold)
        except ValueError:
            raise UsageError(f"--threshold takes a number or 'calibrate', got {args.threshold!r}") from None
    rows, _ = additivity.run_scan(kind, args.samples, args.seed, args.restarts, threshold, channel, args.alpha)
    table = additivity.rows_to_csv(rows, FMT)
    summary = _dump_json(additivity.summarize(rows, threshold))
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(table)
        except OSError as exc:
            raise DataError(f"cannot write {args.out}: {exc.strerror}") from None
        out.write(summary + "\n")
    else:
        out.write(table)
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    cutoff = args.cutoff
    default = {"entropy": 200, "channels": 120, "extremality": 30}[args.suite]
    cutoff = default if cutoff is None else cutoff
    if cutoff < 2 or cutoff > 400 or (args.suite == "extremality" and cutoff > 40):
        raise UsageError(f"--cutoff {cutoff} outside the oracle limits for suite {args.suite}")
    results = verify.run_suite(args.suite, cutoff, seeds=args.seeds, seed=args.seed)
    if args.format == "json":
        out.write(_dump_json([r.to_dict() for r in results]) + "\n")
    else:
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            out.write(f"{status}  {r.name}: max deviation {format(r.max_deviation, FMT)} (tol {r.tolerance:g}, n={r.count})\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gausschan",
        description="Gaussian channel capacities, Gaussian entanglement of formation and oracle checks.",
        epilog=__doc__.split("\n", 2)[2],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("capacity", help="capacity table for one channel family")
    p.add_argument("--channel", choices=("lossy", "thermal", "amplifier", "classical"), required=True)
    p.add_argument("--eta", type=float, default=1.0, help="transmittivity or gain")
    p.add_argument("--c", type=float, default=1.0, help="environment noise c >= 1")
    p.add_argument("--y", type=float, default=None, help="classical noise variance")
    p.add_argument("--photons", type=float, required=True, help="mean photon number constraint N")
    p.add_argument("--sweep", help="param:lo:hi:steps over eta, c, photons or y")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("fiber", help="capacities of a fiber link with eta = exp(-l / l_A)")
    p.add_argument("--length", type=float, required=True)
    p.add_argument("--absorption-length", type=float, required=True)
    p.add_argument("--photons", type=float, required=True)
    p.add_argument("--temperature-c", type=float, default=1.0, help="environment noise c (1 = vacuum)")
    p.add_argument("--sweep", help="length:lo:hi:steps")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_fiber)

    p = sub.add_parser("eof", help="Gaussian entanglement of formation of a covariance matrix file")
    p.add_argument("--gamma", required=True, help="matrix file ('n=<modes>' + rows, or JSON)")
    p.add_argument("--partition", help="A|B mode lists, e.g. '0|1' or '0,2|1,3' (default: 0 | rest)")
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("barrier", "simplex"), default="barrier")
    p.set_defaults(func=cmd_eof)

    p = sub.add_parser("scan", help="seeded additivity residual scans")
    p.add_argument("--kind", choices=tuple(SCAN_KINDS), required=True)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--threshold", default=str(additivity.DEFAULT_THRESHOLD), help="number or 'calibrate'")
    p.add_argument("--channel", choices=("lossy", "classical"), default="lossy", help="moe scans only")
    p.add_argument("--eta", type=float, default=0.6)
    p.add_argument("--y", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--out", help="CSV destination (summary JSON goes to stdout)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify", help="Fock-basis oracle cross-checks")
    p.add_argument("--suite", choices=verify.SUITES, required=True)
    p.add_argument("--cutoff", type=int, default=None)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    # quasi-Newton steps against the penalty wall; the results are checked for feasibility
    warnings.filterwarnings("ignore", message="The line search algorithm did not converge")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
