"""Tests for the spherical metric kernels.

Covers:
1. ScaledLog arithmetic and rendering
2. Archimedean −log δ, including the point at infinity
3. Vectorised real kernel matrix
4. p-adic ball codes and rational expansion
5. p-adic −log δ against a valuation formula and its symmetries
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from engine.core.kernel import (
    PAdicBallCode,
    ProjectivePointReal,
    ScaledLog,
    neg_log_delta_padic,
    neg_log_delta_real,
    real_kernel_matrix,
)
from engine.errors import DomainError, InsufficientPrecisionError
from shared.schemas import LocalFieldSpec

Q2 = LocalFieldSpec(p=2)
Q3 = LocalFieldSpec(p=3)


def _valuation(x: Fraction, p: int) -> int:
    num, den, v = x.numerator, x.denominator, 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


# =============================================================================
# 1. ScaledLog
# =============================================================================


def test_scaled_log_float_and_text() -> None:
    """3/4 · log 2 renders exactly and converts to 0.519860…"""
    value = ScaledLog(Fraction(3, 4), 2)
    assert str(value) == "3/4 · log 2"
    assert float(value) == pytest.approx(0.75 * math.log(2), abs=1e-15)
    assert value.to_payload() == {"coefficient": "3/4", "prime": 2}


def test_scaled_log_arithmetic() -> None:
    """Sums, differences and rational scaling stay exact."""
    a, b = ScaledLog(Fraction(1, 3), 5), ScaledLog(Fraction(1, 6), 5)
    assert a + b == ScaledLog(Fraction(1, 2), 5)
    assert a - b == ScaledLog(Fraction(1, 6), 5)
    assert -a == ScaledLog(Fraction(-1, 3), 5)
    assert a * 3 == ScaledLog(Fraction(1), 5)
    assert Fraction(1, 2) * a == ScaledLog(Fraction(1, 6), 5)
    assert b < a
    assert ScaledLog.zero(5) == ScaledLog(Fraction(0), 5)


def test_scaled_log_rejects_mixed_primes() -> None:
    """log 2 and log 3 cannot be combined exactly."""
    with pytest.raises(DomainError):
        ScaledLog(Fraction(1), 2) + ScaledLog(Fraction(1), 3)


# =============================================================================
# 2. Archimedean kernel
# =============================================================================


@pytest.mark.parametrize(
    ("x", "y", "expected"),
    [
        (0.0, 1.0, 0.0),
        (0.0, 0.5, math.log(2)),
        (2.0, -2.0, 0.0),
        (0.25, 0.5, math.log(4)),
        (3.0, 4.0, math.log(12)),
    ],
)
def test_neg_log_delta_real_values(x: float, y: float, expected: float) -> None:
    """−log δ matches −log|x−y| + log⁺|x| + log⁺|y|."""
    assert neg_log_delta_real(x, y) == pytest.approx(expected, abs=1e-15)
    assert neg_log_delta_real(y, x) == pytest.approx(expected, abs=1e-15)


def test_neg_log_delta_real_infinity() -> None:
    """Against ∞ the kernel is log max(1, |x|); ∞ against itself is +inf."""
    inf = ProjectivePointReal.infinity()
    assert neg_log_delta_real(inf, 3.0) == pytest.approx(math.log(3))
    assert neg_log_delta_real(0.5, inf) == 0.0
    assert neg_log_delta_real(inf, -math.inf) == math.inf
    assert neg_log_delta_real(1.5, 1.5) == math.inf


def test_neg_log_delta_real_is_nonnegative() -> None:
    """δ ≤ 1 everywhere, so the kernel never goes negative."""
    grid = np.linspace(-7.0, 7.0, 29)
    for x in grid:
        for y in grid:
            if x != y:
                assert neg_log_delta_real(float(x), float(y)) >= 0.0


def test_projective_point_rejects_nan() -> None:
    """NaN is not a point."""
    with pytest.raises(DomainError):
        ProjectivePointReal(math.nan)


# =============================================================================
# 3. Real kernel matrix
# =============================================================================


def test_real_kernel_matrix_matches_scalar_kernel() -> None:
    """Off-diagonal entries equal the scalar kernel; the diagonal is +inf."""
    points = np.array([-1.75, -0.3, 0.2, 1.1, 2.5])
    matrix = real_kernel_matrix(points)
    assert np.all(np.isinf(np.diag(matrix)))
    for i, x in enumerate(points):
        for j, y in enumerate(points):
            if i != j:
                assert matrix[i, j] == pytest.approx(neg_log_delta_real(float(x), float(y)))
    assert np.array_equal(matrix, matrix.T)


# =============================================================================
# 4. Ball codes
# =============================================================================


def test_from_rational_expansion() -> None:
    """1/2 in Q_2 starts at valuation −1; 6 in Q_3 at valuation 1 with digit 2."""
    half = PAdicBallCode.from_rational(Fraction(1, 2), Q2, precision=4)
    assert half.base_valuation == -1
    assert half.digits == (1, 0, 0, 0)
    assert half.valuation() == -1

    six = PAdicBallCode.from_rational(6, Q3, precision=3)
    assert six.base_valuation == 1
    assert six.digits == (2, 0, 0)
    assert six.radius_exponent == 4


def test_from_rational_negative_unit() -> None:
    """−1 in Q_2 is the all-ones expansion."""
    code = PAdicBallCode.from_rational(-1, Q2, precision=6)
    assert code.digits == (1,) * 6
    assert code.valuation() == 0


def test_zero_code_has_no_valuation() -> None:
    """An all-zero code is the point 0."""
    zero = PAdicBallCode.from_rational(0, Q3, precision=5)
    assert zero.valuation() is None
    assert str(zero) == "pi^0:00000"


def test_ball_code_validates_digits() -> None:
    """Digits must be residue indices below q."""
    with pytest.raises(DomainError):
        PAdicBallCode(Q2, 0, (0, 2))


def test_from_rational_requires_q_p() -> None:
    """Rational expansion is only defined over Q_p itself."""
    with pytest.raises(DomainError):
        PAdicBallCode.from_rational(1, LocalFieldSpec(p=2, e=2), precision=4)


# =============================================================================
# 5. p-adic kernel
# =============================================================================


@pytest.mark.parametrize(
    ("x", "y", "coeff"),
    [
        (Fraction(0), Fraction(1), Fraction(0)),
        (Fraction(0), Fraction(1, 2), Fraction(0)),
        (Fraction(0), Fraction(2), Fraction(1)),
        (Fraction(1, 2), Fraction(1, 4), Fraction(1)),
        (Fraction(1, 2), Fraction(3, 2), Fraction(2)),
        (Fraction(5), Fraction(1), Fraction(2)),
    ],
)
def test_neg_log_delta_padic_known_values(x: Fraction, y: Fraction, coeff: Fraction) -> None:
    """Hand-computed values over Q_2."""
    cx = PAdicBallCode.from_rational(x, Q2, precision=12)
    cy = PAdicBallCode.from_rational(y, Q2, precision=12)
    assert neg_log_delta_padic(cx, cy) == ScaledLog(coeff, 2)
    assert neg_log_delta_padic(cy, cx) == ScaledLog(coeff, 2)


def test_neg_log_delta_padic_matches_valuation_formula() -> None:
    """−log_3 δ(x, y) = v(x−y) + max(0, −v(x)) + max(0, −v(y)) over a grid of rationals."""
    values = [Fraction(a, b) for a in (1, 2, 4, 5, 7, 9) for b in (1, 3, 9, 2)]
    codes = {x: PAdicBallCode.from_rational(x, Q3, precision=16) for x in values}
    for x in values:
        for y in values:
            if x == y:
                continue
            expected = _valuation(x - y, 3) + max(0, -_valuation(x, 3)) + max(0, -_valuation(y, 3))
            assert neg_log_delta_padic(codes[x], codes[y]).coeff == expected


def test_neg_log_delta_padic_inversion_invariance() -> None:
    """δ is invariant under x ↦ 1/x on the projective line."""
    pairs = [
        (Fraction(1, 2), Fraction(4)),
        (Fraction(3), Fraction(6)),
        (Fraction(2, 3), Fraction(5)),
    ]
    for x, y in pairs:
        direct = neg_log_delta_padic(
            PAdicBallCode.from_rational(x, Q2, 16), PAdicBallCode.from_rational(y, Q2, 16)
        )
        inverted = neg_log_delta_padic(
            PAdicBallCode.from_rational(1 / x, Q2, 16), PAdicBallCode.from_rational(1 / y, Q2, 16)
        )
        assert direct == inverted


@pytest.mark.parametrize("unit", [Fraction(2), Fraction(4), Fraction(1, 2)])
@pytest.mark.parametrize("shift", [Fraction(0), Fraction(1), Fraction(7)])
def test_neg_log_delta_padic_unit_and_translation_invariance(
    unit: Fraction, shift: Fraction
) -> None:
    """δ is unchanged by x ↦ ux for a unit u and by x ↦ x + a for a ∈ O_K."""

    def kernel(x: Fraction, y: Fraction) -> ScaledLog:
        return neg_log_delta_padic(
            PAdicBallCode.from_rational(x, Q3, 16), PAdicBallCode.from_rational(y, Q3, 16)
        )

    pairs = [
        (Fraction(1, 3), Fraction(5)),
        (Fraction(1, 9), Fraction(2, 3)),
        (Fraction(6), Fraction(15)),
        (Fraction(2), Fraction(11)),
    ]
    for x, y in pairs:
        direct = kernel(x, y)
        assert kernel(unit * x, unit * y) == direct
        assert kernel(x + shift, y + shift) == direct


def test_neg_log_delta_padic_ramified_field() -> None:
    """Over a ramified quadratic extension one step in the tree is (1/2)·log 2."""
    field = LocalFieldSpec(p=2, e=2)
    zero = PAdicBallCode(field, 0, (0, 0))
    pi = PAdicBallCode(field, 0, (0, 1))
    assert neg_log_delta_padic(zero, pi) == ScaledLog(Fraction(1, 2), 2)


def test_neg_log_delta_padic_indistinguishable() -> None:
    """Codes agreeing on every digit cannot be separated."""
    code = PAdicBallCode.from_rational(3, Q2, precision=4)
    with pytest.raises(InsufficientPrecisionError):
        neg_log_delta_padic(code, code)


def test_neg_log_delta_padic_rejects_mixed_fields() -> None:
    """Both points must live over the same field."""
    with pytest.raises(DomainError):
        neg_log_delta_padic(PAdicBallCode(Q2, 0, (1,)), PAdicBallCode(Q3, 0, (1,)))
