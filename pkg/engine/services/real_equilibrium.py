"""δ-equilibrium measure and δ-Robin constant of the interval [−r, r].

For r ≥ 1 the problem is the logarithmic energy problem with external field
log^+|x|. Its solution has density

    G(x) = 2 arcsin(1/r) / (π² √(r²−x²)) + φ(x) / (π² x),
    φ(x) = log |(x+1)(r²−x+S) / ((x−1)(r²+x+S))|,  S = √(r²−x²)·√(r²−1),

and Robin constant log(2/r) + (2/π)∫_1^r log x/√(r²−x²) dx + 2∫_1^r G(x) log x dx.
For r < 1 the δ-kernel on the set is −log|x−y|, the measure is the arcsine
distribution and V_δ = −log(r/2) = log(2/r).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

from engine.core.quadrature import IntegrandSpec, Singularity, integrate
from engine.errors import DomainError
from shared.schemas import RealIntervalSpec, Regime, SingularityKind

logger = logging.getLogger(__name__)

# Below this |x| the factor φ(x)/x is replaced by its two-sided difference quotient.
REMOVABLE_THRESHOLD = 1e-6
# Closest approach to x = ±1 at which φ is evaluated directly.
LOG_POINT_FLOOR = 1e-12

_SQRT = SingularityKind.INVERSE_SQRT_ENDPOINT
_LOG = SingularityKind.LOG_POINT
_REMOVABLE = SingularityKind.REMOVABLE_POINT


@dataclass(frozen=True)
class RealEquilibriumMeasure:
    """μ on [−r, r] with its Robin constant; ``aux`` is (B_f, C_f) when r ≥ 1."""

    spec: RealIntervalSpec
    density: Callable[[float], float]
    robin: float
    aux: tuple[float, float] | None


def _sqrt_gap(r: float, x: float) -> float:
    """√(r² − x²) computed as √((r−x)(r+x))."""
    return math.sqrt((r - x) * (r + x))


def _phi(r: float, x: float) -> float:
    s = _sqrt_gap(r, x) * math.sqrt(r * r - 1.0)
    near = abs(x - 1.0)
    if near < LOG_POINT_FLOOR:
        near = LOG_POINT_FLOOR
    return (
        math.log(abs(x + 1.0))
        - math.log(near)
        + math.log(r * r - x + s)
        - math.log(r * r + x + s)
    )


def _phi_over_x(r: float, ax: float) -> float:
    """φ(x)/x for x = ax ≥ 0; φ is odd so this is even in x."""
    if ax < REMOVABLE_THRESHOLD:
        h = REMOVABLE_THRESHOLD
        return (_phi(r, h) - _phi(r, -h)) / (2.0 * h)
    return _phi(r, ax) / ax


def density_at(spec: RealIntervalSpec, x: float) -> float:
    """Equilibrium density G(x) on (−r, r).

    Raises:
        DomainError: If |x| ≥ r.
    """
    r = spec.r
    ax = abs(x)
    if not ax < r:
        raise DomainError(f"x={x} outside the open interval (-{r}, {r})")
    if spec.regime == Regime.CLASSICAL:
        return 1.0 / (math.pi * _sqrt_gap(r, ax))
    b_f = 2.0 * math.asin(1.0 / r) / math.pi
    return b_f / (math.pi * _sqrt_gap(r, ax)) + _phi_over_x(r, ax) / math.pi**2


def arcsine_density(spec: RealIntervalSpec) -> Callable[[float], float]:
    """Classical (unweighted) equilibrium density 1/(π√(r²−x²)) of [−r, r]."""
    r = spec.r
    return lambda x: 1.0 / (math.pi * _sqrt_gap(r, abs(x)))


def antiderivative_F(t: float, s: float) -> float:
    """The antiderivative F_t(s) of 2√(1−t²)/(π²√(1−s²)(s²−t²)) in s.

    Returns signed infinity at s = ±t.

    Raises:
        DomainError: If t = 0, |t| ≥ 1 or |s| > 1.
    """
    if t == 0.0 or not abs(t) < 1.0 or abs(s) > 1.0:
        raise DomainError(f"F_t(s) undefined for t={t}, s={s}")
    root = math.sqrt((1.0 - t) * (1.0 + t)) * math.sqrt((1.0 - s) * (1.0 + s))
    numerator = abs((s - t) * (1.0 + s * t + root))
    denominator = abs((s + t) * (1.0 - s * t + root))
    scale = 1.0 / (math.pi**2 * t)
    if numerator == 0.0:
        return -math.copysign(math.inf, scale)
    if denominator == 0.0:
        return math.copysign(math.inf, scale)
    return scale * math.log(numerator / denominator)


def _interval_singularities(
    spec: RealIntervalSpec, a: float, b: float, *, removable_limit: float | None
) -> tuple[Singularity, ...]:
    """Singularities of an equilibrium density restricted to [a, b] ⊂ [−r, r]."""
    r = spec.r
    found: list[Singularity] = []
    for end in (a, b):
        if abs(end) == r:
            found.append(Singularity(end, _SQRT))
    if r > 1.0:
        found.extend(Singularity(c, _LOG) for c in (-1.0, 1.0) if a <= c <= b)
    if removable_limit is not None and a < 0.0 < b:
        found.append(Singularity(0.0, _REMOVABLE, removable_limit))
    return tuple(found)


def integrate_against_density(
    g: Callable[[float], float],
    h: Callable[[float], float],
    r: float,
    tol: float | None = None,
) -> float:
    """∫ g·h over [−r, r] with the density's singularities declared.

    Declares inverse-square-root endpoints at ±r, log points at ±1 when r > 1
    and the removable point 0 with limit g(0)·h(0).
    """
    spec = RealIntervalSpec(r=r)
    singularities = _interval_singularities(spec, -r, r, removable_limit=g(0.0) * h(0.0))
    integrand = IntegrandSpec(lambda x: g(x) * h(x), (-r, r), singularities)
    return integrate(integrand, tol).value


def mass_between(spec: RealIntervalSpec, a: float, b: float, tol: float | None = None) -> float:
    """μ([a, b]) for −r ≤ a < b ≤ r."""
    r = spec.r
    if not -r <= a < b <= r:
        raise DomainError(f"[{a}, {b}] is not a sub-interval of [-{r}, {r}]")
    limit = density_at(spec, 0.0)
    singularities = _interval_singularities(spec, a, b, removable_limit=limit)
    integrand = IntegrandSpec(lambda x: density_at(spec, x), (a, b), singularities)
    return integrate(integrand, tol).value


def arcsine_height_integral(spec: RealIntervalSpec, tol: float | None = None) -> float:
    """∫ log^+|x| dμ_arcsine over [−r, r]; the limiting height of algebraic integers."""
    r = spec.r
    if r <= 1.0:
        return 0.0
    integrand = IntegrandSpec(
        lambda x: math.log(x) / (math.pi * _sqrt_gap(r, x)),
        (1.0, r),
        (Singularity(r, _SQRT),),
    )
    return 2.0 * integrate(integrand, tol).value


def _log_moment(spec: RealIntervalSpec, tol: float | None) -> float:
    """∫_1^r G(x) log x dx."""
    r = spec.r
    integrand = IntegrandSpec(
        lambda x: density_at(spec, x) * math.log(x),
        (1.0, r),
        (Singularity(1.0, _LOG), Singularity(r, _SQRT)),
    )
    return integrate(integrand, tol).value


def robin_constant_real(spec: RealIntervalSpec, tol: float | None = None) -> float:
    """δ-Robin constant V_δ([−r, r])."""
    r = spec.r
    if spec.regime == Regime.CLASSICAL:
        return math.log(2.0 / r)
    if r == 1.0:
        return math.log(2.0)
    value = math.log(2.0 / r) + arcsine_height_integral(spec, tol) + 2.0 * _log_moment(spec, tol)
    logger.debug("V_delta([-%g, %g]) = %.12g", r, r, value)
    return value


def _density_times_gap(spec: RealIntervalSpec, ax: float, gap: float) -> float:
    """G(x)·√(r²−x²) for |x| = ax, with the gap √(r²−x²) supplied by the caller."""
    if spec.regime == Regime.CLASSICAL:
        return 1.0 / math.pi
    b_f = 2.0 * math.asin(1.0 / spec.r) / math.pi
    if spec.r == 1.0:
        # φ vanishes identically on [−1, 1]
        return b_f / math.pi
    return b_f / math.pi + _phi_over_x(spec.r, ax) * gap / math.pi**2


def _endpoint_log_integral(spec: RealIntervalSpec, tol: float | None) -> float:
    """∫ G(x) log|x − r| dx, taken in x = r cos θ so that r − x and the gap stay exact."""
    r = spec.r

    def integrand(theta: float) -> float:
        x = r * math.cos(theta)
        weight = _density_times_gap(spec, abs(x), r * math.sin(theta))
        return weight * math.log(2.0 * r * math.sin(0.5 * theta) ** 2)

    singularities = [Singularity(0.0, _LOG)]
    if r > 1.0:
        singularities.extend(Singularity(math.acos(c / r), _LOG) for c in (1.0, -1.0))
    return integrate(IntegrandSpec(integrand, (0.0, math.pi), tuple(singularities)), tol).value


def weighted_potential(spec: RealIntervalSpec, y: float, tol: float | None = None) -> float:
    """−∫ G(x) log|x−y| dx + log^+|y| for y ∈ [−r, r].

    On the set this is the constant log(2/r) + (2/π)∫_1^r log x/√(r²−x²) dx.
    """
    r = spec.r
    if not -r <= y <= r:
        raise DomainError(f"y={y} outside [-{r}, {r}]")
    log_plus = math.log(abs(y)) if abs(y) > 1.0 else 0.0
    if abs(y) == r:
        # G is even, so both endpoints see the same integral
        return -_endpoint_log_integral(spec, tol) + log_plus
    singularities = [Singularity(-r, _SQRT), Singularity(r, _SQRT), Singularity(y, _LOG)]
    if r > 1.0:
        singularities.extend(Singularity(c, _LOG) for c in (-1.0, 1.0) if c != y)
    if y != 0.0:
        limit = density_at(spec, 0.0) * math.log(abs(y))
        singularities.append(Singularity(0.0, _REMOVABLE, limit))
    integrand = IntegrandSpec(
        lambda x: density_at(spec, x) * math.log(abs(x - y)),
        (-r, r),
        tuple(singularities),
    )
    return -integrate(integrand, tol).value + log_plus


def potential_constant(spec: RealIntervalSpec, tol: float | None = None) -> float:
    """log(2/r) + (2/π)∫_1^r log x/√(r²−x²) dx, the value of the potential on the set."""
    return math.log(2.0 / spec.r) + arcsine_height_integral(spec, tol)


def real_equilibrium_measure(
    spec: RealIntervalSpec, tol: float | None = None
) -> RealEquilibriumMeasure:
    """Assemble the equilibrium measure value for [−r, r]."""
    aux = None
    if spec.regime == Regime.EXTERNAL_FIELD:
        b_f = 2.0 * math.asin(1.0 / spec.r) / math.pi
        c_f = arcsine_height_integral(spec, tol) + math.log(2.0)
        aux = (b_f, c_f)
    return RealEquilibriumMeasure(
        spec=spec,
        density=lambda x: density_at(spec, x),
        robin=robin_constant_real(spec, tol),
        aux=aux,
    )
