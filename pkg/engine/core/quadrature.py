"""Adaptive one-dimensional quadrature with declared singularities.

The integrand is split at every declared point. Pieces touching an
inverse-square-root endpoint are mapped through x = a + (b−a)·sin²θ (or its
half-angle form when only one end is singular), which turns the endpoint
blow-up into a smooth integrand in θ. Log points get a geometrically graded
initial mesh in the mapped variable, and removable points are excised by a
symmetric ε-interval whose contribution is 2ε times the declared limit. A
removable point within 2ε of another break is integrated through instead.

Every panel is estimated with a 10- and a 20-point Gauss–Legendre rule; the
difference is the panel error estimate and the panel with the largest
estimate is bisected until the total meets the tolerance.
"""

from __future__ import annotations

import heapq
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from engine.config import settings
from engine.errors import DomainError, ToleranceNotMetError, UndeclaredSingularityError
from shared.schemas import SingularityKind

logger = logging.getLogger(__name__)

MIN_TOL = 1e-14

# Half-width of the excised interval around a removable point, relative to b − a.
REMOVABLE_HALF_WIDTH = 1e-9

# Graded mesh toward a log point: panel edges at ratio GRADING_RATIO, GRADING_LEVELS deep.
GRADING_RATIO = 0.25
GRADING_LEVELS = 20

_LOW_NODES, _LOW_WEIGHTS = np.polynomial.legendre.leggauss(10)
_HIGH_NODES, _HIGH_WEIGHTS = np.polynomial.legendre.leggauss(20)


@dataclass(frozen=True)
class Singularity:
    """A declared singular point; ``limit`` is required for removable points."""

    location: float
    kind: SingularityKind
    limit: float | None = None


@dataclass(frozen=True)
class IntegrandSpec:
    """A real function on the open interval (a, b) together with its singularities."""

    f: Callable[[float], float]
    interval: tuple[float, float]
    singularities: tuple[Singularity, ...] = ()

    def __post_init__(self) -> None:
        a, b = self.interval
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise DomainError(f"invalid interval ({a}, {b})")
        for s in self.singularities:
            if not a <= s.location <= b:
                raise DomainError(f"singularity at {s.location} outside [{a}, {b}]")
            if s.kind == SingularityKind.INVERSE_SQRT_ENDPOINT and s.location not in (a, b):
                raise DomainError("inverse_sqrt_endpoint must sit at a or b")
            if s.kind == SingularityKind.REMOVABLE_POINT:
                if s.limit is None or not math.isfinite(s.limit):
                    raise DomainError("removable_point needs a finite limit value")
                if not a < s.location < b:
                    raise DomainError("removable_point must be interior")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


@dataclass(order=True)
class _Panel:
    # heapq is a min-heap, so the key is the negated error estimate
    sort_key: float
    piece: int = field(compare=False)
    lo: float = field(compare=False)
    hi: float = field(compare=False)
    value: float = field(compare=False)
    error: float = field(compare=False)


@dataclass
class _Piece:
    """A sub-interval [u, v] of (a, b) and the map from its integration variable."""

    u: float
    v: float
    mapping: str  # "identity", "both", "left", "right"
    log_lo: bool
    log_hi: bool

    @property
    def span(self) -> tuple[float, float]:
        if self.mapping == "identity":
            return self.u, self.v
        return 0.0, math.pi / 2

    def point_and_jacobian(self, t: float) -> tuple[float, float]:
        width = self.v - self.u
        if self.mapping == "identity":
            return t, 1.0
        if self.mapping == "both":
            return self.u + width * math.sin(t) ** 2, width * math.sin(2.0 * t)
        half = 2.0 * math.sin(0.5 * t) ** 2  # 1 − cos t without cancellation
        if self.mapping == "left":
            return self.u + width * half, width * math.sin(t)
        return self.v - width * half, width * math.sin(t)


class _Integrator:
    def __init__(self, spec: IntegrandSpec, singular_points: set[float]) -> None:
        self.spec = spec
        self.singular_points = singular_points
        self.evaluations = 0

    def _at_edge(self, piece: _Piece, x: float) -> bool:
        return x in self.singular_points or not piece.u < x < piece.v

    def _sample(self, piece: _Piece, t: float) -> float:
        x, jac = piece.point_and_jacobian(t)
        self.evaluations += 1
        try:
            value = self.spec.f(x)
        except (ArithmeticError, ValueError) as exc:
            # the map can round a node onto a declared end; its weight is negligible
            if self._at_edge(piece, x):
                return 0.0
            raise UndeclaredSingularityError(x) from exc
        if not math.isfinite(value):
            if self._at_edge(piece, x):
                return 0.0
            raise UndeclaredSingularityError(x)
        return value * jac

    def panel(self, index: int, piece: _Piece, lo: float, hi: float) -> _Panel:
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        low = sum(
            w * self._sample(piece, mid + half * t) for t, w in zip(_LOW_NODES, _LOW_WEIGHTS)
        )
        high = sum(
            w * self._sample(piece, mid + half * t) for t, w in zip(_HIGH_NODES, _HIGH_WEIGHTS)
        )
        value, error = half * high, abs(half * (high - low))
        return _Panel(-error, index, lo, hi, value, error)


def _graded_edges(lo: float, hi: float, toward_lo: bool, toward_hi: bool) -> list[float]:
    if toward_lo and toward_hi:
        mid = 0.5 * (lo + hi)
        return _graded_edges(lo, mid, True, False)[:-1] + _graded_edges(mid, hi, False, True)
    if not (toward_lo or toward_hi):
        return [lo, hi]
    steps = [GRADING_RATIO**k for k in range(GRADING_LEVELS, 0, -1)]
    if toward_lo:
        return [lo] + [lo + (hi - lo) * s for s in steps] + [hi]
    return [lo] + [hi - (hi - lo) * s for s in reversed(steps)] + [hi]


def _build_pieces(spec: IntegrandSpec) -> tuple[list[_Piece], float, set[float]]:
    a, b = spec.interval
    eps = REMOVABLE_HALF_WIDTH * (b - a)
    sqrt_ends = {
        s.location for s in spec.singularities if s.kind == SingularityKind.INVERSE_SQRT_ENDPOINT
    }
    log_points = {s.location for s in spec.singularities if s.kind == SingularityKind.LOG_POINT}
    removable: dict[float, float] = {}
    for s in sorted(spec.singularities, key=lambda s: s.location):
        if s.kind != SingularityKind.REMOVABLE_POINT:
            continue
        # an excision must not swallow another break point
        neighbours = {a, b} | log_points | set(removable)
        if min(abs(s.location - p) for p in neighbours) <= 2.0 * eps:
            logger.debug("Removable point %g merged into a nearby break", s.location)
            continue
        removable[s.location] = float(s.limit)  # type: ignore[arg-type]
    excised = sum(2.0 * eps * limit for limit in removable.values())

    breaks = sorted({a, b} | log_points | set(removable))
    pieces: list[_Piece] = []
    for u, v in zip(breaks[:-1], breaks[1:]):
        lo = u + eps if u in removable else u
        hi = v - eps if v in removable else v
        left, right = u == a and a in sqrt_ends, v == b and b in sqrt_ends
        mapping = "both" if left and right else "left" if left else "right" if right else "identity"
        log_u, log_v = u in log_points, v in log_points
        if mapping == "right":
            # θ = 0 sits at v for the mirrored map
            log_u, log_v = log_v, log_u
        pieces.append(_Piece(lo, hi, mapping, log_u, log_v))
    return pieces, excised, sqrt_ends | log_points


def integrate(
    spec: IntegrandSpec,
    tol: float | None = None,
    *,
    max_panels: int | None = None,
) -> QuadratureResult:
    """Integrate ``spec.f`` over ``spec.interval`` to absolute tolerance ``tol``.

    Args:
        spec: Integrand with its declared singularities.
        tol: Target absolute error; defaults to ``settings.TOL``.
        max_panels: Refinement budget; defaults to ``settings.QUAD_MAX_PANELS``.

    Returns:
        QuadratureResult with the value, the summed panel error estimate and
        the number of integrand evaluations.

    Raises:
        DomainError: If tol is below 1e-14.
        UndeclaredSingularityError: If f is non-finite at an undeclared point.
        ToleranceNotMetError: If the panel budget runs out first.
    """
    tol = settings.TOL if tol is None else tol
    max_panels = settings.QUAD_MAX_PANELS if max_panels is None else max_panels
    if not tol >= MIN_TOL:
        raise DomainError(f"tol must be at least {MIN_TOL}, got {tol}")

    pieces, excised, singular_points = _build_pieces(spec)
    integrator = _Integrator(spec, singular_points)
    heap: list[_Panel] = []
    for index, piece in enumerate(pieces):
        lo, hi = piece.span
        edges = _graded_edges(lo, hi, piece.log_lo, piece.log_hi)
        for left, right in zip(edges[:-1], edges[1:]):
            heapq.heappush(heap, integrator.panel(index, piece, left, right))

    total_error = sum(p.error for p in heap)
    while total_error > tol:
        if len(heap) >= max_panels:
            value = excised + _ordered_sum(heap)
            raise ToleranceNotMetError(value, total_error, integrator.evaluations, tol)
        worst = heapq.heappop(heap)
        mid = 0.5 * (worst.lo + worst.hi)
        if not worst.lo < mid < worst.hi:
            value = excised + _ordered_sum(heap) + worst.value
            raise ToleranceNotMetError(value, total_error, integrator.evaluations, tol)
        piece = pieces[worst.piece]
        halves = (
            integrator.panel(worst.piece, piece, worst.lo, mid),
            integrator.panel(worst.piece, piece, mid, worst.hi),
        )
        for half in halves:
            heapq.heappush(heap, half)
        total_error += halves[0].error + halves[1].error - worst.error
        # keep the running sum honest against drift
        if len(heap) % 256 == 0:
            total_error = sum(p.error for p in heap)

    value = excised + _ordered_sum(heap)
    logger.debug(
        "integrate: %d panels, %d evaluations, estimate %.2e",
        len(heap),
        integrator.evaluations,
        total_error,
    )
    return QuadratureResult(value, total_error, integrator.evaluations)


def _ordered_sum(panels: list[_Panel]) -> float:
    """Sum panel values in a fixed order so results do not depend on heap history."""
    ordered = sorted(panels, key=lambda p: (p.piece, p.lo))
    return math.fsum(p.value for p in ordered)
