"""delta-robin command-line interface.

Usage:
    delta-robin real --r 2                      # V_δ([−2, 2])
    delta-robin padic --p 2 --n -1              # V_δ(2^{-1} Z_2), exact
    delta-robin global --spec places.txt        # global height lower bound
    delta-robin verify --suite padic            # oracle comparisons
    delta-robin minimize --p 2 --n -1 --depth 2 # discrete minimiser as CSV

stdout carries only the requested payload; diagnostics go to stderr. Exit
codes: 0 success, 1 failed verification, 2 invalid input, 3 numerical
failure, 4 duplicate primes.
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from pydantic import ValidationError

from engine.config import settings
from engine.core.kernel import ScaledLog
from engine.errors import (
    DomainError,
    DuplicatePrimeError,
    InsufficientPrecisionError,
    LeafBudgetError,
    NonConvergenceError,
    RobinError,
    SpecParseError,
    ToleranceNotMetError,
)
from engine.services.discrete_oracle import (
    build_padic_energy_matrix,
    build_real_energy_matrix,
    minimize_energy,
    shell_masses,
)
from engine.services.height_bounds import global_lower_bound
from engine.services.padic_equilibrium import equilibrium_measure, robin_constant_padic
from engine.services.place_parser import parse_place_file
from engine.services.real_equilibrium import density_at, real_equilibrium_measure
from engine.services.verification import SUITES, run_suite
from shared.schemas import LocalFieldSpec, OutputFormat, RealIntervalSpec
from shared.utils import dumps_payload, format_float, format_fraction, write_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_DUPLICATE_PRIME = 4

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Output:
    """Collects the payload of one command and renders it in the chosen format."""

    def __init__(self, fmt: OutputFormat) -> None:
        self.format = fmt
        self.digits = settings.FLOAT_DIGITS

    def emit(
        self,
        payload: dict[str, Any],
        header: list[str],
        rows: list[list[Any]],
        lines: list[str],
    ) -> None:
        if self.format == OutputFormat.JSON:
            print(dumps_payload(payload, self.digits))
        elif self.format == OutputFormat.CSV:
            buffer = io.StringIO()
            write_csv(buffer, header, rows, self.digits)
            sys.stdout.write(buffer.getvalue())
        else:
            print("\n".join(lines))

    def number(self, value: float) -> str:
        return format_float(value, self.digits)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_real(args: argparse.Namespace, out: Output) -> int:
    spec = RealIntervalSpec(r=args.r)
    measure = real_equilibrium_measure(spec, args.tol)
    payload: dict[str, Any] = {
        "schema_version": "1",
        "r": spec.r,
        "regime": spec.regime.value,
        "v_delta": measure.robin,
        "halved": measure.robin / 2,
    }
    if measure.aux is not None:
        payload["b_f"], payload["c_f"] = measure.aux

    if args.density_samples:
        count = args.density_samples
        width = 2.0 * spec.r / count
        samples = [
            [x, density_at(spec, x)] for x in (-spec.r + (i + 0.5) * width for i in range(count))
        ]
        if args.out:
            write_csv(Path(args.out), ["x", "density"], samples, out.digits)
            logger.info("Wrote %d density samples to %s", count, args.out)
        else:
            payload["density"] = samples

    lines = [
        f"V_delta({spec.label}) = {out.number(measure.robin)}",
        f"halved contribution   = {out.number(measure.robin / 2)}",
        f"regime                = {spec.regime.value}",
    ]
    out.emit(
        payload,
        ["r", "regime", "v_delta"],
        [[spec.r, spec.regime.value, measure.robin]],
        lines,
    )
    return EXIT_OK


def cmd_padic(args: argparse.Namespace, out: Output) -> int:
    field = LocalFieldSpec(p=args.p, e=args.e, f=args.f)
    robin = robin_constant_padic(field, args.n)
    measure = equilibrium_measure(field, args.n)
    text = f"{robin} = {out.number(float(robin))}"
    payload: dict[str, Any] = {
        "schema_version": "1",
        "field": field.label,
        "p": field.p,
        "e": field.e,
        "f": field.f,
        "n": args.n,
        "v_delta": robin.to_payload(),
        "v_delta_text": str(robin),
        "v_delta_float": float(robin),
    }
    lines = [f"V_delta(pi^{args.n} O_K) over {field.label} = {text}"]
    rows: list[list[Any]] = [["v_delta", format_fraction(robin.coeff), float(robin)]]
    if not measure.is_haar:
        payload["coefficients"] = measure.coefficient_payload()
        for k, c in sorted(measure.coeffs.items(), reverse=True):
            lines.append(f"  c_{k} = {format_fraction(c)}")
            rows.append([f"c_{k}", format_fraction(c), float(c)])
    out.emit(payload, ["quantity", "exact", "float"], rows, lines)
    return EXIT_OK


def cmd_global(args: argparse.Namespace, out: Output) -> int:
    places = parse_place_file(args.spec)
    report = global_lower_bound(places, args.tol)
    rows = [
        [
            p.place.kind.value,
            ";".join(f"{k}={v}" for k, v in p.place.parameters().items()),
            format_fraction(p.place.weight),
            p.v_delta_float,
            p.contribution,
        ]
        for p in report.per_place
    ]
    lines = [
        f"{p.place.describe():<40} V_delta = {out.number(p.v_delta_float)}"
        f"  contribution = {out.number(p.contribution)}"
        for p in report.per_place
    ]
    lines.append(f"total = {out.number(report.total)}")
    lines.extend(f"reference {ref.name} = {out.number(ref.value)}" for ref in report.references)
    lines.extend(f"note: {note}" for note in report.notes)
    out.emit(
        report.to_payload(),
        ["kind", "parameters", "weight", "v_delta", "contribution"],
        rows,
        lines,
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, out: Output) -> int:
    results = run_suite(args.suite, m=args.m, depth=args.depth)
    passed = all(c.passed for c in results)
    payload = {
        "schema_version": "1",
        "suite": args.suite,
        "passed": passed,
        "checks": [c.to_payload() for c in results],
    }
    rows = [[c.suite, c.name, c.status.value, c.observed, c.expected] for c in results]
    lines = [
        f"{c.status.value} {c.suite}/{c.name}: observed {c.observed}, expected {c.expected}"
        for c in results
    ]
    out.emit(payload, ["suite", "check", "status", "observed", "expected"], rows, lines)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def cmd_minimize(args: argparse.Namespace, out: Output) -> int:
    if args.r is not None:
        spec = RealIntervalSpec(r=args.r)
        matrix = build_real_energy_matrix(spec, args.m)
        label = spec.label
    else:
        if args.p is None or args.n is None:
            raise DomainError("minimize needs --r, or --p with --n")
        field = LocalFieldSpec(p=args.p, e=args.e, f=args.f)
        matrix = build_padic_energy_matrix(field, args.n, args.depth)
        label = f"pi^{args.n} O_K over {field.label}"
    result = minimize_energy(matrix)
    rows = result.measure.rows()
    if args.out:
        write_csv(Path(args.out), ["cell", "weight"], rows, out.digits)
        logger.info("Wrote %d cells to %s", len(rows), args.out)

    energy = result.energy
    payload: dict[str, Any] = {
        "schema_version": "1",
        "set": label,
        "cells": matrix.size,
        "method": result.method,
        "energy_float": float(energy),
        "residual": result.residual,
        "weights": rows,
    }
    lines = [f"set {label}: {matrix.size} cells via {result.method}"]
    if isinstance(energy, ScaledLog):
        payload["energy"] = energy.to_payload()
        masses = shell_masses(result.measure)
        payload["shell_masses"] = {
            str(k): format_fraction(v) for k, v in sorted(masses.items(), reverse=True)
        }
        lines.append(f"energy = {energy} = {out.number(float(energy))}")
    else:
        lines.append(f"energy = {out.number(float(energy))}, residual {result.residual:.3e}")
    out.emit(payload, ["cell", "weight"], rows, lines)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _positive_float(raw: str) -> float:
    value = float(raw)
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {raw}")
    return value


def _nonnegative_int(raw: str) -> int:
    value = int(raw)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {raw}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format",
        choices=[f.value for f in OutputFormat],
        default=OutputFormat.JSON.value,
        help="Payload format on stdout",
    )

    parser = argparse.ArgumentParser(
        prog="delta-robin",
        description="δ-Robin constants, equilibrium measures and height lower bounds",
    )
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=LOG_LEVELS,
        default=None,
        help="Logging level (default ROBIN_LOG_LEVEL)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    real = sub.add_parser("real", parents=[common], help="Interval [-r, r]")
    real.add_argument("--r", type=_positive_float, required=True)
    real.add_argument("--density-samples", type=_nonnegative_int, default=0)
    real.add_argument("--out", default=None, help="CSV file for density samples")
    real.add_argument("--tol", type=float, default=None, help="Quadrature tolerance")
    real.set_defaults(handler=cmd_real)

    padic = sub.add_parser("padic", parents=[common], help="Disc pi^n O_K")
    padic.add_argument("--p", type=int, required=True)
    padic.add_argument("--e", type=int, default=1)
    padic.add_argument("--f", type=int, default=1)
    padic.add_argument("--n", type=int, required=True)
    padic.set_defaults(handler=cmd_padic)

    glob = sub.add_parser("global", parents=[common], help="Global height lower bound")
    glob.add_argument("--spec", required=True, help="Place list (.txt, .yaml or .json)")
    glob.add_argument("--tol", type=float, default=None, help="Quadrature tolerance")
    glob.set_defaults(handler=cmd_global)

    verify = sub.add_parser("verify", parents=[common], help="Run oracle checks")
    verify.add_argument("--suite", choices=SUITES, default="all")
    verify.add_argument("--m", type=int, default=2000, help="Real cells")
    verify.add_argument("--depth", type=int, default=2, help="Largest p-adic depth")
    verify.set_defaults(handler=cmd_verify)

    minimize = sub.add_parser("minimize", parents=[common], help="Discrete energy minimiser")
    target = minimize.add_mutually_exclusive_group(required=True)
    target.add_argument("--r", type=_positive_float, default=None)
    target.add_argument("--p", type=int, default=None)
    minimize.add_argument("--e", type=int, default=1)
    minimize.add_argument("--f", type=int, default=1)
    minimize.add_argument("--n", type=int, default=None)
    minimize.add_argument("--m", type=int, default=200, help="Real cells")
    minimize.add_argument("--depth", type=int, default=1, help="p-adic leaf depth")
    minimize.add_argument("--out", default=None, help="CSV file for (cell, weight)")
    minimize.set_defaults(handler=cmd_minimize)
    return parser


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, DuplicatePrimeError):
        return EXIT_DUPLICATE_PRIME
    if isinstance(exc, (ToleranceNotMetError, NonConvergenceError)):
        return EXIT_NUMERICAL
    if isinstance(
        exc,
        (
            ValidationError,
            DomainError,
            SpecParseError,
            InsufficientPrecisionError,
            LeafBudgetError,
            FileNotFoundError,
        ),
    ):
        return EXIT_INVALID
    return EXIT_VERIFY_FAILED


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run one subcommand and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    level = (args.log_level or settings.LOG_LEVEL).upper()
    logging.basicConfig(stream=sys.stderr, level=level, format=LOG_FORMAT, force=True)

    out = Output(OutputFormat(args.format))
    try:
        return int(args.handler(args, out))
    except (RobinError, ValidationError, FileNotFoundError) as exc:
        code = _exit_code(exc)
        if code == EXIT_VERIFY_FAILED:
            logger.exception("%s failed", args.command)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    raise SystemExit(main())
