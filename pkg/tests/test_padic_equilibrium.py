"""Tests for the exact p-adic equilibrium measures.

Covers:
1. Capacities of balls and shells
2. Shell coefficients of μ_n and their closed-form checks
3. Potentials: equal on the set, decaying outside
4. δ-Robin constants, the n → −∞ limit and the Haar case n ≥ 0
5. Energy of shell mixtures
"""

from __future__ import annotations

from fractions import Fraction
from unittest.mock import patch

import pytest

from engine.core.kernel import PAdicBallCode, ScaledLog
from engine.errors import DomainError, InvariantViolationError
from engine.services.padic_equilibrium import (
    capacity_ball,
    capacity_shell,
    equilibrium_coefficients,
    equilibrium_measure,
    potential_at,
    potential_at_point,
    robin_constant_padic,
    robin_limit,
    shell_energy,
)
from shared.schemas import LocalFieldSpec

Q2 = LocalFieldSpec(p=2)
Q3 = LocalFieldSpec(p=3)
Q5 = LocalFieldSpec(p=5)

GRID_FIELDS = [
    LocalFieldSpec(p=2),
    LocalFieldSpec(p=3),
    LocalFieldSpec(p=2, f=2),
    LocalFieldSpec(p=5),
    LocalFieldSpec(p=7),
    LocalFieldSpec(p=2, f=3),
    LocalFieldSpec(p=3, f=2),
    LocalFieldSpec(p=3, e=2),
]
GRID_N = list(range(-1, -9, -1))


def _log(coeff: Fraction | int, p: int) -> ScaledLog:
    return ScaledLog(Fraction(coeff), p)


# =============================================================================
# 1. Capacities
# =============================================================================


def test_capacity_ball_examples() -> None:
    """log γ(O_{Q_2}) = −log 2 and log γ(3² Z_3) = −(5/2) log 3."""
    assert capacity_ball(Q2, 0) == _log(-1, 2)
    assert capacity_ball(Q3, 2) == _log(Fraction(-5, 2), 3)


def test_capacity_shell_examples() -> None:
    """log γ(Z_2^×) = −2 log 2 and log γ(5^{−1} Z_5^×) = (11/16) log 5."""
    assert capacity_shell(Q2, 0) == _log(-2, 2)
    assert capacity_shell(Q5, -1) == _log(Fraction(11, 16), 5)


@pytest.mark.parametrize("field", GRID_FIELDS, ids=lambda f: f.label)
@pytest.mark.parametrize("n", [-3, -1, 0, 2])
def test_ball_splits_into_subball_and_shell(field: LocalFieldSpec, n: int) -> None:
    """log γ(π^n O) = (1/q)·n·log|π| + ((q−1)/q)·log γ(π^n O^×)."""
    q = field.q
    n_log_abs_pi = ScaledLog(-n * field.neg_log_abs_pi, field.p)
    combined = Fraction(1, q) * n_log_abs_pi + Fraction(q - 1, q) * capacity_shell(field, n)
    assert combined == capacity_ball(field, n)


def test_capacity_ramified_scaling() -> None:
    """With e = 2 every capacity halves as a multiple of log p."""
    ramified = LocalFieldSpec(p=3, e=2)
    assert capacity_ball(ramified, 1).coeff == capacity_ball(Q3, 1).coeff / 2


# =============================================================================
# 2. Shell coefficients
# =============================================================================


@pytest.mark.parametrize(
    ("field", "n", "expected"),
    [
        (Q2, -1, {0: Fraction(3, 4), -1: Fraction(1, 4)}),
        (Q3, -1, {0: Fraction(7, 9), -1: Fraction(2, 9)}),
        (Q2, -2, {0: Fraction(11, 16), -1: Fraction(3, 16), -2: Fraction(1, 8)}),
    ],
)
def test_coefficients_known_values(
    field: LocalFieldSpec, n: int, expected: dict[int, Fraction]
) -> None:
    """Small systems solved by hand."""
    assert dict(equilibrium_coefficients(field, n).coeffs) == expected


@pytest.mark.parametrize("field", GRID_FIELDS, ids=lambda f: f.label)
@pytest.mark.parametrize("n", GRID_N)
def test_coefficients_grid(field: LocalFieldSpec, n: int) -> None:
    """Σc_k = 1, c_0 = (q + q^{2n})/(q + 1) and every c_k ≥ 0, all exactly."""
    q = field.q
    coeffs = equilibrium_coefficients(field, n).coeffs
    assert sorted(coeffs) == list(range(n, 1))
    assert sum(coeffs.values()) == 1
    assert coeffs[0] == (q + Fraction(1, q ** (-2 * n))) / (q + 1)
    assert all(c >= 0 for c in coeffs.values())


@pytest.mark.parametrize("field", [Q2, Q3, LocalFieldSpec(p=2, f=2)], ids=lambda f: f.label)
@pytest.mark.parametrize("n", [-1, -3, -6])
def test_transformed_rows(field: LocalFieldSpec, n: int) -> None:
    """Row k minus 1/(q−1) times the mass row gives right-hand side −1/(q−1)."""
    q = field.q
    c = equilibrium_coefficients(field, n).coeffs
    shift = Fraction(1, q - 1)
    for k in range(n, 0):
        lhs = -Fraction(q, (q - 1) ** 2) * c[k]
        lhs += sum((ell - shift) * c[ell] for ell in range(k, 0))
        lhs += sum((k - shift) * c[ell] for ell in range(n, k))
        assert lhs == -shift


def test_coefficients_require_negative_n() -> None:
    """n ≥ 0 has no shell decomposition."""
    with pytest.raises(DomainError):
        equilibrium_coefficients(Q2, 0)


def test_coefficient_payload() -> None:
    """Exact fraction strings, outermost shell last."""
    measure = equilibrium_coefficients(Q2, -2)
    assert measure.coefficient_payload() == {"0": "11/16", "-1": "3/16", "-2": "1/8"}
    assert list(measure.coefficient_payload()) == ["0", "-1", "-2"]


def test_negative_solution_is_an_invariant_violation() -> None:
    """A solver result with a negative weight is rejected."""
    with patch(
        "engine.services.padic_equilibrium.solve_exact",
        return_value=[Fraction(3, 4), Fraction(-1, 4)],
    ):
        with pytest.raises(InvariantViolationError, match="negative"):
            equilibrium_coefficients(Q2, -1)


def test_wrong_c0_is_an_invariant_violation() -> None:
    """c_0 must match its closed form."""
    with patch(
        "engine.services.padic_equilibrium.solve_exact",
        return_value=[Fraction(1, 2), Fraction(1, 2)],
    ):
        with pytest.raises(InvariantViolationError, match="c_0"):
            equilibrium_coefficients(Q2, -1)


# =============================================================================
# 3. Potentials
# =============================================================================


def test_potential_examples_q2() -> None:
    """U(0) = U(1/2) = (3/4)·log 2 for μ_{−1} over Q_2."""
    measure = equilibrium_coefficients(Q2, -1)
    assert potential_at(measure, 0) == _log(Fraction(3, 4), 2)
    assert potential_at(measure, -1) == potential_at(measure, 0)


@pytest.mark.parametrize("field", GRID_FIELDS, ids=lambda f: f.label)
@pytest.mark.parametrize("n", GRID_N)
def test_potential_constant_equals_robin(field: LocalFieldSpec, n: int) -> None:
    """All |n| + 1 test points see the same potential, which is V_δ."""
    measure = equilibrium_coefficients(field, n)
    values = {potential_at(measure, k) for k in range(n, 1)}
    assert values == {robin_constant_padic(field, n)}


def test_potential_at_range() -> None:
    """k must be one of 0, −1, …, n."""
    measure = equilibrium_coefficients(Q2, -2)
    with pytest.raises(DomainError):
        potential_at(measure, -3)
    with pytest.raises(DomainError):
        potential_at(measure, 1)


def test_potential_at_haar_only_at_zero() -> None:
    """The Haar measure is only evaluated at 0."""
    haar = equilibrium_measure(Q2, 1)
    assert haar.is_haar
    assert potential_at(haar, 0) == robin_constant_padic(Q2, 1)
    with pytest.raises(DomainError):
        potential_at(haar, -1)


@pytest.mark.parametrize(
    "x",
    [Fraction(0), Fraction(1), Fraction(2), Fraction(3), Fraction(1, 2), Fraction(3, 4)],
)
def test_potential_at_point_on_set(x: Fraction) -> None:
    """Every point of 2^{−2} Z_2 sits at potential V_δ = (11/16)·log 2."""
    measure = equilibrium_coefficients(Q2, -2)
    code = PAdicBallCode.from_rational(x, Q2, precision=8)
    assert potential_at_point(measure, code) == _log(Fraction(11, 16), 2)


@pytest.mark.parametrize("x", [Fraction(1, 8), Fraction(3, 8), Fraction(1, 1024)])
def test_potential_at_point_off_set(x: Fraction) -> None:
    """Outside the disc the potential drops to Σ c_ℓ·(−ℓ)·log 2 = (7/16)·log 2."""
    measure = equilibrium_coefficients(Q2, -2)
    code = PAdicBallCode.from_rational(x, Q2, precision=8)
    value = potential_at_point(measure, code)
    assert value == _log(Fraction(7, 16), 2)
    assert value < robin_constant_padic(Q2, -2)


def test_potential_at_point_haar() -> None:
    """Haar on 4Z_2: V_δ inside, log⁺-clipped valuation outside."""
    measure = equilibrium_measure(Q2, 2)
    assert potential_at_point(measure, PAdicBallCode.from_rational(4, Q2, 8)) == _log(3, 2)
    assert potential_at_point(measure, PAdicBallCode.from_rational(2, Q2, 8)) == _log(1, 2)
    half = PAdicBallCode.from_rational(Fraction(1, 2), Q2, 8)
    assert potential_at_point(measure, half) == _log(0, 2)


def test_potential_at_point_rejects_other_field() -> None:
    """Points must live over the measure's field."""
    measure = equilibrium_coefficients(Q2, -1)
    with pytest.raises(DomainError):
        potential_at_point(measure, PAdicBallCode.from_rational(1, Q3, 4))


# =============================================================================
# 4. Robin constants
# =============================================================================


def test_robin_q2_half_disc() -> None:
    """V_δ(2^{−1} Z_2) = (3/4)·log 2 = 0.519860…, halved 0.25993."""
    value = robin_constant_padic(Q2, -1)
    assert value == _log(Fraction(3, 4), 2)
    assert float(value) == pytest.approx(0.51986038542, abs=1e-12)
    assert float(value) / 2 == pytest.approx(0.25993, abs=1e-5)


@pytest.mark.parametrize(
    ("field", "n", "expected"),
    [
        (Q5, 0, _log(Fraction(1, 4), 5)),
        (LocalFieldSpec(p=2, e=2), 0, _log(Fraction(1, 2), 2)),
        (Q3, 2, _log(Fraction(5, 2), 3)),
    ],
)
def test_robin_haar_case(field: LocalFieldSpec, n: int, expected: ScaledLog) -> None:
    """For n ≥ 0, V_δ = (n + 1/(q−1))·(−log|π|) = −log γ."""
    assert robin_constant_padic(field, n) == expected
    assert robin_constant_padic(field, n) == -capacity_ball(field, n)


def test_robin_limit_values() -> None:
    """V_δ(P¹(Q_2)) = (2/3)·log 2 and V_δ(P¹(Q_3)) = (3/8)·log 3."""
    assert robin_limit(Q2) == _log(Fraction(2, 3), 2)
    assert robin_limit(Q3) == _log(Fraction(3, 8), 3)


def test_robin_approaches_limit() -> None:
    """At n = −20 the gap to the limit is 2^{−40}/3 in units of log 2."""
    value = robin_constant_padic(Q2, -20)
    assert value.coeff == (2 + Fraction(1, 2**40)) / 3
    assert abs(float(value) - float(robin_limit(Q2))) < 1e-12


@pytest.mark.parametrize("field", [Q2, Q3, LocalFieldSpec(p=2, f=2)], ids=lambda f: f.label)
def test_robin_strictly_decreasing(field: LocalFieldSpec) -> None:
    """V_δ(π^n O_K) strictly decreases to the limit as n → −∞."""
    values = [robin_constant_padic(field, n) for n in range(-1, -12, -1)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] > robin_limit(field)


# =============================================================================
# 5. Shell-mixture energy
# =============================================================================


@pytest.mark.parametrize("n", [-1, -2, -4])
def test_shell_energy_at_equilibrium(n: int) -> None:
    """The equilibrium mixture has energy exactly V_δ."""
    measure = equilibrium_coefficients(Q3, n)
    assert shell_energy(Q3, n, measure.coeffs) == robin_constant_padic(Q3, n)


def test_shell_energy_perturbation_increases() -> None:
    """Moving mass between shells raises the energy."""
    coeffs = dict(equilibrium_coefficients(Q2, -2).coeffs)
    robin = robin_constant_padic(Q2, -2)
    for src, dst in ((0, -1), (-1, -2), (-2, 0)):
        moved = dict(coeffs)
        moved[src] -= Fraction(1, 32)
        moved[dst] += Fraction(1, 32)
        assert shell_energy(Q2, -2, moved) > robin


@pytest.mark.parametrize(
    "coeffs",
    [
        {0: Fraction(1, 2), -1: Fraction(1, 4)},
        {0: Fraction(3, 2), -1: Fraction(-1, 2)},
        {0: Fraction(1)},
    ],
)
def test_shell_energy_validation(coeffs: dict[int, Fraction]) -> None:
    """Coefficients must be a probability vector on n..0."""
    with pytest.raises(DomainError):
        shell_energy(Q2, -1, coeffs)


def test_shell_energy_requires_negative_n() -> None:
    """There are no shells for n ≥ 0."""
    with pytest.raises(DomainError):
        shell_energy(Q2, 0, {0: Fraction(1)})
