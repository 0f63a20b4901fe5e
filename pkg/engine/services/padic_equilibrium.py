"""Exact δ-equilibrium measures and δ-Robin constants of the discs π^n O_K.

Everything here is a rational multiple of log p. Internally potentials are
kept in units of −log|π| = (log p)/e and converted to :class:`ScaledLog` at
the boundary.

For n < 0 the equilibrium measure is c_0 λ_0 + Σ_{k=n}^{-1} c_k ν_k with λ_0
the Haar measure of O_K and ν_k the Haar measure of the shell π^k O_K^×. The
coefficients solve the equal-potential system at the test points 0, π^{-1},
…, π^n. For n ≥ 0 the δ-kernel is the plain log kernel on the set and the
Haar measure of the disc is the equilibrium measure.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from engine.core.exact_linalg import solve_exact
from engine.core.kernel import PAdicBallCode, ScaledLog
from engine.errors import DomainError, InvariantViolationError
from shared.schemas import LocalFieldSpec
from shared.utils import format_fraction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PAdicEquilibriumMeasure:
    """μ_n on π^n O_K; an empty ``coeffs`` mapping marks the Haar measure λ_n (n ≥ 0)."""

    field: LocalFieldSpec
    n: int
    coeffs: Mapping[int, Fraction] = field(default_factory=dict)

    @property
    def is_haar(self) -> bool:
        return not self.coeffs

    def coefficient_payload(self) -> dict[str, str]:
        """Coefficients keyed by shell index as exact fraction strings."""
        return {str(k): format_fraction(c) for k, c in sorted(self.coeffs.items(), reverse=True)}


def _scaled(field: LocalFieldSpec, units: Fraction) -> ScaledLog:
    """Convert a multiple of −log|π| to a multiple of log p."""
    return ScaledLog(units * field.neg_log_abs_pi, field.p)


def _ball_units(q: int, n: int) -> Fraction:
    """−∫ log|x−y| dλ_n(y) for x in π^n O_K, in units of −log|π|."""
    return n + Fraction(1, q - 1)


def _shell_units(q: int, n: int) -> Fraction:
    """−∫ log|x−y| dν_n(y) for x in the shell π^n O_K^×, in units of −log|π|."""
    return n + Fraction(q, (q - 1) ** 2)


def capacity_ball(field: LocalFieldSpec, n: int) -> ScaledLog:
    """log γ_∞(π^n O_K) = (n + 1/(q−1))·log|π|."""
    return -_scaled(field, _ball_units(field.q, n))


def capacity_shell(field: LocalFieldSpec, n: int) -> ScaledLog:
    """log γ_∞(π^n O_K^×) = (n + q/(q−1)²)·log|π|."""
    return -_scaled(field, _shell_units(field.q, n))


def _check_coefficients(field: LocalFieldSpec, n: int, coeffs: Mapping[int, Fraction]) -> None:
    expected = set(range(n, 1))
    if set(coeffs) != expected:
        raise DomainError(f"coefficients must be indexed by {n}..0, got {sorted(coeffs)}")
    if any(c < 0 for c in coeffs.values()):
        raise DomainError("coefficients must be nonnegative")
    if sum(coeffs.values()) != 1:
        raise DomainError("coefficients must sum to 1")


def _log_plus_mean(n: int, coeffs: Mapping[int, Fraction]) -> Fraction:
    """∫ log^+|y| dμ(y) in units of −log|π|; shell k < 0 sits at |y| = |π|^k."""
    return sum((c * -k for k, c in coeffs.items() if k < 0), Fraction(0))


def _potential_units(
    q: int, n: int, coeffs: Mapping[int, Fraction], valuation: int | None
) -> Fraction:
    """U_δ^μ at a point of the given valuation (None for 0), in units of −log|π|.

    ``coeffs`` holds c_0 for O_K and c_k for the shells n ≤ k ≤ −1. The log
    potential of λ_0 and ν_k only depends on the valuation of the point, so
    U_δ^μ is constant on every shell and on O_K.
    """
    v = valuation
    total = Fraction(0)
    for k, c in coeffs.items():
        if k == 0:
            # λ_0: inside O_K the ball capacity term, outside −log|x−y| = −log|x|
            total += c * (_ball_units(q, 0) if v is None or v >= 0 else v)
        elif v == k:
            total += c * _shell_units(q, k)
        else:
            total += c * (k if v is None else min(v, k))
    log_plus_x = 0 if v is None or v >= 0 else -v
    return total + log_plus_x + _log_plus_mean(n, coeffs)


def equilibrium_coefficients(field: LocalFieldSpec, n: int) -> PAdicEquilibriumMeasure:
    """Solve for the shell coefficients of μ_n, n < 0, in exact rationals.

    Unknowns are ordered c_0, c_{−1}, …, c_n. Row 0 is Σ c_k = 1; row k
    equates the potential at π^k with the potential at 0.

    Raises:
        DomainError: If n ≥ 0.
        InvariantViolationError: If a coefficient is negative or c_0 misses
            its closed form.
    """
    if n >= 0:
        raise DomainError(f"equilibrium_coefficients needs n < 0, got {n}")
    q = field.q
    indices = list(range(0, n - 1, -1))
    column = {k: j for j, k in enumerate(indices)}
    size = len(indices)

    matrix = [[Fraction(0)] * size for _ in range(size)]
    rhs = [Fraction(0)] * size
    matrix[0] = [Fraction(1)] * size
    rhs[0] = Fraction(1)
    for row, k in enumerate(indices[1:], start=1):
        matrix[row][column[0]] += Fraction(1, q - 1)
        matrix[row][column[k]] -= Fraction(q, (q - 1) ** 2)
        for ell in range(k, 0):
            matrix[row][column[ell]] += ell
        for ell in range(n, k):
            matrix[row][column[ell]] += k

    solution = solve_exact(matrix, rhs)
    coeffs = {k: solution[column[k]] for k in indices}

    closed_c0 = Fraction(q + Fraction(1, q ** (-2 * n)), q + 1)
    if coeffs[0] != closed_c0:
        raise InvariantViolationError(
            f"c_0 = {coeffs[0]} differs from (q+q^2n)/(q+1) = {closed_c0}"
        )
    negative = {k: c for k, c in coeffs.items() if c < 0}
    if negative:
        raise InvariantViolationError(f"negative equilibrium coefficients {negative}")
    logger.debug("Solved %d-shell system for q=%d, n=%d", size, q, n)
    return PAdicEquilibriumMeasure(field=field, n=n, coeffs=coeffs)


def equilibrium_measure(field: LocalFieldSpec, n: int) -> PAdicEquilibriumMeasure:
    """μ_n for any n: the Haar marker for n ≥ 0, the solved shell mixture otherwise."""
    if n >= 0:
        return PAdicEquilibriumMeasure(field=field, n=n)
    return equilibrium_coefficients(field, n)


def potential_at(measure: PAdicEquilibriumMeasure, k: int) -> ScaledLog:
    """U_δ^{μ_n} at 0 (k = 0) or at π^k (n ≤ k ≤ −1).

    Raises:
        DomainError: If k is outside {0, −1, …, n}, or k ≠ 0 for a Haar measure.
    """
    field, n = measure.field, measure.n
    q = field.q
    if measure.is_haar:
        if k != 0:
            raise DomainError("the Haar measure is only evaluated at 0")
        return _scaled(field, _ball_units(q, n))
    if not n <= k <= 0:
        raise DomainError(f"k={k} outside {n}..0")
    c = measure.coeffs
    if k == 0:
        return _scaled(field, c[0] / (q - 1))
    units = Fraction(q, (q - 1) ** 2) * c[k]
    units -= sum((ell * c[ell] for ell in range(k, 0)), Fraction(0))
    units -= sum((k * c[ell] for ell in range(n, k)), Fraction(0))
    return _scaled(field, units)


def potential_at_point(measure: PAdicEquilibriumMeasure, x: PAdicBallCode) -> ScaledLog:
    """U_δ^{μ_n}(x) for an arbitrary encoded point x of K.

    Inside π^n O_K the value is the Robin constant. Outside it the potential
    decays: for n < 0 it equals Σ c_ℓ·(−ℓ)·(−log|π|).
    """
    field, n = measure.field, measure.n
    if x.field != field:
        raise DomainError("point and measure live over different fields")
    q = field.q
    v = x.valuation()
    if measure.is_haar:
        if v is None or v >= n:
            return _scaled(field, _ball_units(q, n))
        return _scaled(field, Fraction(max(v, 0)))
    return _scaled(field, _potential_units(q, n, measure.coeffs, v))


def shell_energy(field: LocalFieldSpec, n: int, coeffs: Mapping[int, Fraction]) -> ScaledLog:
    """I_δ(c_0 λ_0 + Σ c_k ν_k) for nonnegative coefficients summing to 1.

    Raises:
        DomainError: If n ≥ 0 or the coefficients are not a probability vector on n..0.
    """
    if n >= 0:
        raise DomainError(f"shell_energy needs n < 0, got {n}")
    coeffs = {k: Fraction(c) for k, c in coeffs.items()}
    _check_coefficients(field, n, coeffs)
    q = field.q
    units = sum(
        (c * _potential_units(q, n, coeffs, None if k == 0 else k) for k, c in coeffs.items()),
        Fraction(0),
    )
    return _scaled(field, units)


def robin_constant_padic(field: LocalFieldSpec, n: int) -> ScaledLog:
    """V_δ(π^n O_K), exact."""
    q = field.q
    if n >= 0:
        return _scaled(field, _ball_units(q, n))
    return _scaled(field, Fraction(q + Fraction(1, q ** (-2 * n)), q * q - 1))


def robin_limit(field: LocalFieldSpec) -> ScaledLog:
    """V_δ(P¹(K)) = q/(q²−1)·(−log|π|), the limit of V_δ(π^n O_K) as n → −∞."""
    q = field.q
    return _scaled(field, Fraction(q, q * q - 1))
