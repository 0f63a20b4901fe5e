"""Check suites behind ``delta-robin verify``.

Each check compares an observed value against the analytic one and records
PASS or FAIL; suites never raise on a failed comparison.
"""

from __future__ import annotations

import logging
from collections.abc import Callable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from engine.services.discrete_oracle import (
    build_padic_energy_matrix,
    build_real_energy_matrix,
    compare_measure_real,
    minimize_energy,
    shell_masses,
)
from engine.services.padic_equilibrium import (
    equilibrium_coefficients,
    potential_at,
    robin_constant_padic,
    robin_limit,
)
from engine.services.real_equilibrium import robin_constant_real
from shared.schemas import CheckStatus, LocalFieldSpec, RealIntervalSpec

logger = logging.getLogger(__name__)

EXACT_GRID_FIELDS = (
    LocalFieldSpec(p=2),
    LocalFieldSpec(p=3),
    LocalFieldSpec(p=2, f=2),
    LocalFieldSpec(p=5),
    LocalFieldSpec(p=7),
    LocalFieldSpec(p=2, f=3),
    LocalFieldSpec(p=3, f=2),
)
EXACT_GRID_N = tuple(range(-1, -9, -1))
ORACLE_FIELDS = (LocalFieldSpec(p=2), LocalFieldSpec(p=3))
ORACLE_N = (-1, -2, -3)
LIMIT_PRIMES = (2, 3, 5)
LIMIT_N = -20

REAL_RADII = (1.0, 2.0)
REAL_ENERGY_TOL = 1e-3
REAL_RESIDUAL_TOL = 1e-6
BIN_TOLERANCE = {1.0: 5e-3, 2.0: 1e-2}

SUITES = ("padic", "real", "all")


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    status: CheckStatus
    observed: str
    expected: str

    @property
    def passed(self) -> bool:
        return self.status == CheckStatus.PASS

    def to_payload(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "name": self.name,
            "status": self.status.value,
            "observed": self.observed,
            "expected": self.expected,
        }


def _check(suite: str, name: str, ok: bool, observed: object, expected: object) -> CheckResult:
    status = CheckStatus.PASS if ok else CheckStatus.FAIL
    if not ok:
        logger.warning("FAIL %s/%s: observed %s, expected %s", suite, name, observed, expected)
    return CheckResult(suite, name, status, str(observed), str(expected))


def _padic_exact_checks() -> Iterator[CheckResult]:
    for field in EXACT_GRID_FIELDS:
        q = field.q
        for n in EXACT_GRID_N:
            tag = f"q={q},n={n}"
            measure = equilibrium_coefficients(field, n)
            coeffs = measure.coeffs
            total = sum(coeffs.values(), Fraction(0))
            yield _check("padic", f"{tag} coefficient sum", total == 1, total, 1)
            closed = Fraction(q + Fraction(1, q ** (-2 * n)), q + 1)
            yield _check("padic", f"{tag} c_0 closed form", coeffs[0] == closed, coeffs[0], closed)
            yield _check(
                "padic",
                f"{tag} nonnegative",
                all(c >= 0 for c in coeffs.values()),
                min(coeffs.values()),
                ">= 0",
            )
            robin = robin_constant_padic(field, n)
            values = {potential_at(measure, k) for k in range(n, 1)}
            yield _check(
                "padic",
                f"{tag} potential constancy",
                values == {robin},
                "; ".join(sorted(str(v) for v in values)),
                robin,
            )


def _padic_limit_checks() -> Iterator[CheckResult]:
    for p in LIMIT_PRIMES:
        field = LocalFieldSpec(p=p)
        q = field.q
        difference = robin_constant_padic(field, LIMIT_N) - robin_limit(field)
        expected = Fraction(1, q ** (-2 * LIMIT_N) * (q * q - 1))
        yield _check(
            "padic", f"p={p} limit gap", difference.coeff == expected, difference.coeff, expected
        )


def _padic_oracle_checks(max_depth: int) -> Iterator[CheckResult]:
    for field in ORACLE_FIELDS:
        for n in ORACLE_N:
            measure = equilibrium_coefficients(field, n)
            robin = robin_constant_padic(field, n)
            for depth in range(1, max_depth + 1):
                tag = f"q={field.q},n={n},depth={depth}"
                result = minimize_energy(build_padic_energy_matrix(field, n, depth))
                yield _check(
                    "padic", f"{tag} oracle energy", result.energy == robin, result.energy, robin
                )
                masses = shell_masses(result.measure)
                yield _check(
                    "padic",
                    f"{tag} shell masses",
                    masses == dict(measure.coeffs),
                    _coeff_text(masses),
                    _coeff_text(measure.coeffs),
                )


def _coeff_text(coeffs: Mapping[int, Fraction]) -> str:
    return "; ".join(f"c_{k}={c}" for k, c in sorted(coeffs.items(), reverse=True))


def _real_checks(m: int) -> Iterator[CheckResult]:
    for r in REAL_RADII:
        spec = RealIntervalSpec(r=r)
        tag = f"r={r:g},m={m}"
        robin = robin_constant_real(spec)
        result = minimize_energy(build_real_energy_matrix(spec, m))
        energy = float(result.energy)
        yield _check(
            "real",
            f"{tag} oracle energy",
            abs(energy - robin) < REAL_ENERGY_TOL,
            f"{energy:.12g}",
            f"{robin:.12g} ± {REAL_ENERGY_TOL:g}",
        )
        yield _check(
            "real",
            f"{tag} equilibrium residual",
            result.residual < REAL_RESIDUAL_TOL,
            f"{result.residual:.3e}",
            f"< {REAL_RESIDUAL_TOL:g}",
        )
        comparison = compare_measure_real(result.measure, spec)
        bound = BIN_TOLERANCE.get(r, max(BIN_TOLERANCE.values()))
        yield _check(
            "real",
            f"{tag} bin discrepancy",
            comparison.max_discrepancy < bound,
            f"{comparison.max_discrepancy:.3e}",
            f"< {bound:g}",
        )


def run_suite(suite: str = "all", m: int = 2000, depth: int = 2) -> list[CheckResult]:
    """Run one of the ``padic``, ``real`` or ``all`` suites.

    Raises:
        ValueError: If the suite name is unknown.
    """
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    parts: list[Callable[[], Iterator[CheckResult]]] = []
    if suite in ("padic", "all"):
        parts += [_padic_exact_checks, _padic_limit_checks, lambda: _padic_oracle_checks(depth)]
    if suite in ("real", "all"):
        parts.append(lambda: _real_checks(m))
    results = [check for part in parts for check in part()]
    failed = sum(not c.passed for c in results)
    logger.info("Suite %s: %d checks, %d failed", suite, len(results), failed)
    return results
