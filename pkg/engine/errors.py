"""Exception hierarchy for the delta-robin engine.

Every error derives from :class:`RobinError` and from the builtin exception a
caller would naturally catch, so ``except ValueError`` keeps working for bad
inputs and ``except RuntimeError`` for numerical failures.
"""

from __future__ import annotations


class RobinError(Exception):
    """Base class for all engine errors."""


class DomainError(RobinError, ValueError):
    """An argument lies outside the domain of the operation."""


class InsufficientPrecisionError(RobinError, ValueError):
    """Two p-adic codes cannot be separated at the digits given."""


class UndeclaredSingularityError(RobinError, ArithmeticError):
    """The integrand produced a non-finite value away from declared singularities."""

    def __init__(self, location: float) -> None:
        super().__init__(f"undeclared singularity: integrand is not finite at x={location!r}")
        self.location = location


class ToleranceNotMetError(RobinError, RuntimeError):
    """Adaptive quadrature ran out of budget before reaching the tolerance."""

    def __init__(self, value: float, error_estimate: float, evaluations: int, tol: float) -> None:
        super().__init__(
            f"tolerance not met: estimate {error_estimate:.3e} > tol {tol:.3e} "
            f"after {evaluations} evaluations (best value {value!r})"
        )
        self.value = value
        self.error_estimate = error_estimate
        self.evaluations = evaluations


class SingularSystemError(RobinError, ArithmeticError):
    """Exact elimination found no pivot."""


class InvariantViolationError(RobinError, AssertionError):
    """A mathematical invariant that must hold for valid inputs failed."""


class NonConvergenceError(RobinError, RuntimeError):
    """An iterative solver stopped before meeting its residual target."""

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class LeafBudgetError(RobinError, ValueError):
    """The p-adic ball tree would exceed the configured leaf budget."""


class DuplicatePrimeError(RobinError, ValueError):
    """A place list names the same prime twice."""


class SpecParseError(RobinError, ValueError):
    """A place-list file could not be parsed."""

    def __init__(self, message: str, line: int | None = None) -> None:
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")
        self.line = line
