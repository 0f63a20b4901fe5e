"""The spherical metric δ and the energy kernel −log δ.

At the archimedean place points live in the affine chart of P¹(R) with a
distinguished point at infinity. At a non-archimedean place points are
encoded by a base valuation and finitely many residue digits; the kernel only
depends on the valuations of x, y and x − y, all of which are read off the
digit prefixes. Non-archimedean values are returned exactly as
:class:`ScaledLog` (a rational multiple of log p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Any

import numpy as np

from engine.errors import DomainError, InsufficientPrecisionError
from shared.schemas import LocalFieldSpec
from shared.utils import format_fraction


@total_ordering
@dataclass(frozen=True)
class ScaledLog:
    """The exact quantity ``coeff · log(prime)``."""

    coeff: Fraction
    prime: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff", Fraction(self.coeff))

    def _check(self, other: ScaledLog) -> None:
        if self.prime != other.prime:
            raise DomainError(f"cannot combine log {self.prime} with log {other.prime}")

    def __add__(self, other: ScaledLog) -> ScaledLog:
        self._check(other)
        return ScaledLog(self.coeff + other.coeff, self.prime)

    def __sub__(self, other: ScaledLog) -> ScaledLog:
        self._check(other)
        return ScaledLog(self.coeff - other.coeff, self.prime)

    def __neg__(self) -> ScaledLog:
        return ScaledLog(-self.coeff, self.prime)

    def __mul__(self, factor: Fraction | int) -> ScaledLog:
        return ScaledLog(self.coeff * factor, self.prime)

    __rmul__ = __mul__

    def __lt__(self, other: Any) -> bool:
        if not isinstance(other, ScaledLog):
            return NotImplemented
        self._check(other)
        return self.coeff < other.coeff

    def __float__(self) -> float:
        return float(self.coeff) * math.log(self.prime)

    def __str__(self) -> str:
        return f"{format_fraction(self.coeff)} · log {self.prime}"

    @classmethod
    def zero(cls, prime: int) -> ScaledLog:
        return cls(Fraction(0), prime)

    def to_payload(self) -> dict[str, Any]:
        return {"coefficient": format_fraction(self.coeff), "prime": self.prime}


# ---------------------------------------------------------------------------
# Archimedean place
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectivePointReal:
    """A point of P¹(R) in the affine chart; ±inf both denote the point at infinity."""

    value: float

    def __post_init__(self) -> None:
        if math.isnan(self.value):
            raise DomainError("NaN is not a point of the projective line")

    @property
    def is_infinity(self) -> bool:
        return math.isinf(self.value)

    @classmethod
    def infinity(cls) -> ProjectivePointReal:
        return cls(math.inf)


def _as_point(x: ProjectivePointReal | float) -> ProjectivePointReal:
    return x if isinstance(x, ProjectivePointReal) else ProjectivePointReal(float(x))


def neg_log_delta_real(x: ProjectivePointReal | float, y: ProjectivePointReal | float) -> float:
    """Return −log δ(x, y) on P¹(R).

    For finite x, y this is −log|x−y| + log max(1,|x|) + log max(1,|y|); when
    one point is infinity it is log max(1,|other|). Coincident points give
    +inf, which is returned as is.
    """
    px, py = _as_point(x), _as_point(y)
    if px.is_infinity and py.is_infinity:
        return math.inf
    if px.is_infinity or py.is_infinity:
        finite = py.value if px.is_infinity else px.value
        return math.log(max(1.0, abs(finite)))
    diff = abs(px.value - py.value)
    if diff == 0.0:
        return math.inf
    delta = diff / (max(1.0, abs(px.value)) * max(1.0, abs(py.value)))
    return -math.log(min(delta, 1.0))


def real_kernel_matrix(points: np.ndarray) -> np.ndarray:
    """Dense −log δ matrix between finite points; the diagonal is left at +inf."""
    pts = np.asarray(points, dtype=float)
    spherical = np.log(np.maximum(1.0, np.abs(pts)))
    with np.errstate(divide="ignore"):
        kernel = -np.log(np.abs(pts[:, None] - pts[None, :]))
    kernel += spherical[:, None] + spherical[None, :]
    np.fill_diagonal(kernel, math.inf)
    return kernel


# ---------------------------------------------------------------------------
# Non-archimedean place
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PAdicBallCode:
    """The point Σ d_i π^(base_valuation + i), read as the centre of the ball of
    radius |π|^(base_valuation + len(digits)).

    Digits are residue-class indices in {0, …, q−1}; index 0 is the zero class,
    distinct indices are distinct residues. As a point the expansion is exact:
    missing trailing digits are zero.
    """

    field: LocalFieldSpec
    base_valuation: int
    digits: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        q = self.field.q
        for d in self.digits:
            if not 0 <= d < q:
                raise DomainError(f"digit {d} outside residue range 0..{q - 1}")

    @property
    def radius_exponent(self) -> int:
        """The ball has radius |π|^radius_exponent."""
        return self.base_valuation + len(self.digits)

    def valuation(self) -> int | None:
        """Exact valuation of the encoded point, or None when every digit is zero."""
        for index, digit in enumerate(self.digits):
            if digit:
                return self.base_valuation + index
        return None

    def aligned(self, base: int, length: int) -> tuple[int, ...]:
        """Digits re-expressed from ``base`` (≤ base_valuation), zero-padded to ``length``."""
        lead = self.base_valuation - base
        if lead < 0:
            raise DomainError("cannot align to a larger base valuation")
        out = (0,) * lead + self.digits
        return out + (0,) * (length - len(out))

    def __str__(self) -> str:
        body = "".join(str(d) if d < 10 else f"[{d}]" for d in self.digits)
        return f"pi^{self.base_valuation}:{body}"

    @classmethod
    def from_rational(
        cls, value: Fraction | int, field: LocalFieldSpec, precision: int = 16
    ) -> PAdicBallCode:
        """Expand a rational number of Q_p to ``precision`` p-adic digits.

        Zero is encoded at base valuation 0 with ``precision`` zero digits.

        Raises:
            DomainError: If the field is not Q_p itself.
        """
        if field.e != 1 or field.f != 1:
            raise DomainError("rational expansion is only defined for K = Q_p")
        if precision < 1:
            raise DomainError("precision must be positive")
        value = Fraction(value)
        p = field.p
        if value == 0:
            return cls(field, 0, (0,) * precision)
        num, den = value.numerator, value.denominator
        v = 0
        while num % p == 0:
            num //= p
            v += 1
        while den % p == 0:
            den //= p
            v -= 1
        modulus = p**precision
        unit = (num * pow(den, -1, modulus)) % modulus
        digits = []
        for _ in range(precision):
            unit, digit = divmod(unit, p)
            digits.append(digit)
        return cls(field, v, tuple(digits))


def _norm_excess(code: PAdicBallCode) -> int:
    """max(0, −v(x)), the exponent of log max(1,|x|) in units of −log|π|."""
    v = code.valuation()
    return 0 if v is None else max(0, -v)


def neg_log_delta_padic(x: PAdicBallCode, y: PAdicBallCode) -> ScaledLog:
    """Return −log δ(x, y) exactly for two encoded points of K.

    Raises:
        InsufficientPrecisionError: If the codes agree on every digit, so the
            points cannot be told apart.
    """
    if x.field != y.field:
        raise DomainError("points belong to different fields")
    base = min(x.base_valuation, y.base_valuation)
    length = max(x.radius_exponent, y.radius_exponent) - base
    xd, yd = x.aligned(base, length), y.aligned(base, length)
    diff_index = next((i for i, (a, b) in enumerate(zip(xd, yd)) if a != b), None)
    if diff_index is None:
        raise InsufficientPrecisionError(f"points {x} and {y} are indistinguishable")
    exponent = base + diff_index + _norm_excess(x) + _norm_excess(y)
    return ScaledLog(exponent * x.field.neg_log_abs_pi, x.field.p)
