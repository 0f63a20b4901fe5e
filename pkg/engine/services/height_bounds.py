"""Global height lower bounds assembled from local δ-Robin constants.

For a set of places S with compact sets E_v, the liminf of the Weil height
over algebraic numbers whose conjugates all lie in the E_v is at least
½ Σ_v N_v·V_δ(E_v). The references are the classical bounds this improves
on: Schinzel's bound for totally real numbers, the Bombieri–Zannier bound
for totally p-adic numbers and the whole-field bound with E_p = P¹(Q_p).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any

from engine.core.kernel import ScaledLog
from engine.errors import DomainError, DuplicatePrimeError, InvariantViolationError
from engine.services.padic_equilibrium import robin_constant_padic
from engine.services.real_equilibrium import robin_constant_real
from shared.schemas import PlaceKind, PlaceSpec
from shared.utils import format_fraction, is_prime

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
TOTAL_TOLERANCE = 1e-12

# ζ(3) (OEIS A002117), the golden ratio (A001622) and π to 30 significant digits.
ZETA_3 = Decimal("1.20205690315959428539973816151")
GOLDEN_RATIO = Decimal("1.61803398874989484820458683437")
PI = Decimal("3.14159265358979323846264338328")

NON_VACUITY_NOTE = (
    "no place uses the whole field Q_p, so infinitely many algebraic numbers with "
    "conjugates in these sets are not guaranteed; the bound holds but may be vacuous"
)
NORMALITY_NOTE = (
    "places with e > 1 or f > 1 assume the local extension is normal; this is not checked"
)


@dataclass(frozen=True)
class PlaceContribution:
    """One place's V_δ and its halved weighted share of the bound."""

    place: PlaceSpec
    v_delta_float: float
    contribution: float
    v_delta_exact: ScaledLog | None = None
    contribution_exact: ScaledLog | None = None

    def to_payload(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "kind": self.place.kind.value,
            "description": self.place.describe(),
            "parameters": self.place.parameters(),
            "weight": format_fraction(self.place.weight),
            "v_delta_exact": self.v_delta_exact.to_payload() if self.v_delta_exact else None,
            "v_delta_float": self.v_delta_float,
            "contribution": self.contribution,
        }
        if self.contribution_exact is not None:
            payload["contribution_exact"] = self.contribution_exact.to_payload()
        return payload


@dataclass(frozen=True)
class ReferenceBound:
    name: str
    value: float


@dataclass(frozen=True)
class BoundReport:
    """Per-place contributions, their total and the literature references."""

    per_place: tuple[PlaceContribution, ...] = ()
    total: float = 0.0
    references: tuple[ReferenceBound, ...] = ()
    notes: tuple[str, ...] = ()
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self) -> None:
        recomputed = math.fsum(p.contribution for p in self.per_place)
        if abs(recomputed - self.total) > TOTAL_TOLERANCE:
            raise InvariantViolationError(
                f"total {self.total!r} differs from recomputed sum {recomputed!r}"
            )

    def reference(self, name: str) -> float:
        for ref in self.references:
            if ref.name == name:
                return ref.value
        raise KeyError(name)

    def to_payload(self) -> dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "places": [p.to_payload() for p in self.per_place],
            "total": self.total,
            "references": {ref.name: ref.value for ref in self.references},
            "notes": list(self.notes),
        }


# ---------------------------------------------------------------------------
# Reference bounds
# ---------------------------------------------------------------------------


def _check_primes(primes: set[int] | frozenset[int]) -> list[int]:
    bad = sorted(p for p in primes if not is_prime(p))
    if bad:
        raise DomainError(f"not prime: {bad}")
    return sorted(primes)


def reference_schinzel() -> float:
    """½ log((1+√5)/2), the lower bound for totally real α ≠ 0, ±1."""
    with localcontext() as ctx:
        ctx.prec = 30
        return float(GOLDEN_RATIO.ln() / 2)


def reference_bombieri_zannier(primes: set[int] | frozenset[int]) -> float:
    """½ Σ_{p∈S} log p/(p+1), the bound for numbers totally p-adic at every p ∈ S.

    Raises:
        DomainError: If S is empty or holds a non-prime.
    """
    if not primes:
        raise DomainError("the Bombieri-Zannier bound needs at least one prime")
    return 0.5 * math.fsum(math.log(p) / (p + 1) for p in _check_primes(primes))


def reference_fp(primes: set[int] | frozenset[int], include_infinity: bool) -> float:
    """½ Σ_{p∈S} p log p/(p²−1), plus 7ζ(3)/(4π²) when ∞ ∈ S.

    Raises:
        DomainError: If S holds a non-prime.
    """
    terms = [p * math.log(p) / (p * p - 1) for p in _check_primes(primes)]
    value = 0.5 * math.fsum(terms)
    if include_infinity:
        with localcontext() as ctx:
            ctx.prec = 30
            value += float(7 * ZETA_3 / (4 * PI * PI))
    return value


# ---------------------------------------------------------------------------
# Global bound
# ---------------------------------------------------------------------------


def _validate_places(places: list[PlaceSpec]) -> None:
    archimedean = [p for p in places if p.kind == PlaceKind.ARCHIMEDEAN]
    if len(archimedean) > 1:
        raise DomainError("at most one archimedean place is allowed")
    seen: set[int] = set()
    for place in places:
        if place.field is None:
            continue
        if place.field.p in seen:
            raise DuplicatePrimeError(f"prime {place.field.p} appears more than once")
        seen.add(place.field.p)


def _contribution(place: PlaceSpec, tol: float | None) -> PlaceContribution:
    half_weight = place.weight / 2
    if place.interval is not None:
        v_delta = robin_constant_real(place.interval, tol)
        return PlaceContribution(
            place=place,
            v_delta_float=v_delta,
            contribution=float(half_weight) * v_delta,
        )
    assert place.field is not None and place.n is not None
    exact = robin_constant_padic(place.field, place.n)
    share = exact * Fraction(half_weight)
    return PlaceContribution(
        place=place,
        v_delta_float=float(exact),
        contribution=float(share),
        v_delta_exact=exact,
        contribution_exact=share,
    )


def global_lower_bound(places: list[PlaceSpec], tol: float | None = None) -> BoundReport:
    """½ Σ N_v·V_δ(E_v) over the given places, with reference bounds attached.

    Raises:
        DomainError: If more than one archimedean place is given.
        DuplicatePrimeError: If two nonarchimedean places share a prime.
    """
    _validate_places(places)
    per_place = [_contribution(place, tol) for place in places]
    total = math.fsum(p.contribution for p in per_place)

    primes = {p.field.p for p in places if p.field is not None}
    has_real = any(p.kind == PlaceKind.ARCHIMEDEAN for p in places)
    references: list[ReferenceBound] = []
    if has_real:
        references.append(ReferenceBound(name="schinzel", value=reference_schinzel()))
    if primes:
        references.append(ReferenceBound(name="bz", value=reference_bombieri_zannier(primes)))
    if primes or has_real:
        references.append(ReferenceBound(name="fp", value=reference_fp(primes, has_real)))

    notes: list[str] = []
    if primes:
        notes.append(NON_VACUITY_NOTE)
        logger.warning("Advisory: %s", NON_VACUITY_NOTE)
    if any(p.field is not None and (p.field.e > 1 or p.field.f > 1) for p in places):
        notes.append(NORMALITY_NOTE)

    logger.info("Global bound over %d places: %.12g", len(places), total)
    return BoundReport(
        per_place=tuple(per_place),
        total=total,
        references=tuple(references),
        notes=tuple(notes),
    )
