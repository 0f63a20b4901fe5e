"""Brute-force check of the equilibrium results by discrete energy minimisation.

The set is cut into cells (equal sub-intervals of [−r, r], or the balls of
radius |π|^depth inside π^n O_K) and the δ-energy of a measure that is
uniform on every cell becomes the quadratic form wᵀAw. Off-diagonal entries
are the kernel between cell representatives; the diagonal is the self-energy
of the uniform measure on the cell.

In p-adic mode every entry is exact and the model is exact for measures that
are Haar on each leaf, so the discrete minimum equals V_δ on the nose.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from engine.config import settings
from engine.core.exact_linalg import solve_exact
from engine.core.kernel import PAdicBallCode, ScaledLog, neg_log_delta_padic, real_kernel_matrix
from engine.errors import (
    DomainError,
    InvariantViolationError,
    LeafBudgetError,
    NonConvergenceError,
)
from engine.services.real_equilibrium import mass_between
from shared.schemas import DiagonalMode, LocalFieldSpec, RealIntervalSpec

logger = logging.getLogger(__name__)

MIN_REAL_CELLS = 10
SYMMETRY_TOL = 1e-12
REAL_SUM_TOL = 1e-12
CERTIFICATE_SLACK = 1e-6
MAX_ACTIVE_SET_ROUNDS = 50
DEFAULT_BINS = 20


@dataclass(frozen=True)
class RealCell:
    """The sub-interval [lo, hi] of the real line."""

    lo: float
    hi: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __str__(self) -> str:
        return f"{self.lo:.12g}..{self.hi:.12g}"


Cell = Union[RealCell, PAdicBallCode]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weights on cells; exact Fractions in p-adic mode, floats in real mode."""

    support: tuple[Cell, ...]
    weights: tuple[float, ...] | tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.support) != len(self.weights):
            raise DomainError("support and weights differ in length")
        if any(w < 0 for w in self.weights):
            raise DomainError("weights must be nonnegative")
        if self.is_exact:
            if sum(self.weights, Fraction(0)) != 1:
                raise DomainError("exact weights must sum to 1")
        elif abs(math.fsum(float(w) for w in self.weights) - 1.0) > REAL_SUM_TOL:
            raise DomainError("weights must sum to 1")

    @property
    def is_exact(self) -> bool:
        return bool(self.weights) and isinstance(self.weights[0], Fraction)

    def rows(self) -> list[list[object]]:
        """(cell, weight) rows for CSV export."""
        return [
            [str(cell), w if isinstance(w, float) else str(w)]
            for cell, w in zip(self.support, self.weights)
        ]


@dataclass(frozen=True)
class EnergyMatrix:
    """Symmetric energy matrix; ``prime`` is set when the entries are exact ScaledLogs."""

    entries: np.ndarray | list[list[ScaledLog]]
    cells: tuple[Cell, ...]
    diagonal_mode: DiagonalMode = DiagonalMode.CELL_SELF_ENERGY
    prime: int | None = None

    @property
    def is_exact(self) -> bool:
        return self.prime is not None

    @property
    def size(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class MinimizationResult:
    """Minimiser, its energy and how it was found."""

    measure: DiscreteMeasure
    energy: float | ScaledLog
    residual: float
    method: str
    iterations: int


@dataclass(frozen=True)
class MeasureComparison:
    max_discrepancy: float
    bin_edges: tuple[float, ...]
    analytic_masses: tuple[float, ...]


# ---------------------------------------------------------------------------
# Matrix assembly
# ---------------------------------------------------------------------------


def build_real_energy_matrix(spec: RealIntervalSpec, m: int) -> EnergyMatrix:
    """Energy matrix of m equal cells of [−r, r].

    The diagonal is −log w + 3/2 (self-energy of the uniform measure on a cell
    of width w) plus the spherical correction 2·log max(1, |midpoint|).

    Raises:
        DomainError: If m < 10.
    """
    if m < MIN_REAL_CELLS:
        raise DomainError(f"need at least {MIN_REAL_CELLS} cells, got {m}")
    r = spec.r
    edges = np.linspace(-r, r, m + 1)
    cells = tuple(RealCell(float(lo), float(hi)) for lo, hi in zip(edges[:-1], edges[1:]))
    mids = np.array([cell.midpoint for cell in cells])
    width = 2.0 * r / m
    entries = real_kernel_matrix(mids)
    diagonal = -math.log(width) + 1.5 + 2.0 * np.log(np.maximum(1.0, np.abs(mids)))
    np.fill_diagonal(entries, diagonal)
    logger.debug("Built %d-cell real energy matrix for r=%g", m, r)
    return EnergyMatrix(entries=entries, cells=cells)


def _leaf_self_energy(code: PAdicBallCode, depth: int) -> ScaledLog:
    field = code.field
    v = code.valuation()
    excess = 0 if v is None else max(0, -v)
    units = depth + Fraction(1, field.q - 1) + 2 * excess
    return ScaledLog(units * field.neg_log_abs_pi, field.p)


def build_padic_energy_matrix(field: LocalFieldSpec, n: int, depth: int) -> EnergyMatrix:
    """Exact energy matrix over the balls of radius |π|^depth inside π^n O_K.

    Raises:
        DomainError: If n ≥ 0 or depth < 1.
        LeafBudgetError: If q^(depth−n) exceeds ``settings.ORACLE_MAX_LEAVES``.
    """
    if n >= 0:
        raise DomainError(f"the p-adic oracle needs n < 0, got {n}")
    if depth < 1:
        raise DomainError(f"depth must be at least 1, got {depth}")
    length = depth - n
    leaves = field.q**length
    if leaves > settings.ORACLE_MAX_LEAVES:
        raise LeafBudgetError(
            f"{leaves} leaves exceed the budget of {settings.ORACLE_MAX_LEAVES}"
        )
    codes = tuple(
        PAdicBallCode(field, n, digits)
        for digits in itertools.product(range(field.q), repeat=length)
    )
    size = len(codes)
    entries: list[list[ScaledLog]] = [[ScaledLog.zero(field.p)] * size for _ in range(size)]
    for i in range(size):
        entries[i][i] = _leaf_self_energy(codes[i], depth)
        for j in range(i + 1, size):
            value = neg_log_delta_padic(codes[i], codes[j])
            entries[i][j] = entries[j][i] = value
    logger.debug("Built %d-leaf p-adic energy matrix for %s, n=%d", size, field.label, n)
    return EnergyMatrix(entries=entries, cells=codes, prime=field.p)


# ---------------------------------------------------------------------------
# Real mode
# ---------------------------------------------------------------------------


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w ≥ 0, Σw = 1}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    cond = u - css / ind > 0
    rho = ind[cond][-1]
    theta = css[cond][-1] / rho
    return np.maximum(v - theta, 0.0)


def _real_residual(a: np.ndarray, w: np.ndarray) -> tuple[float, float, np.ndarray]:
    aw = a @ w
    energy = float(w @ aw)
    supported = w > 0
    residual = float(np.max(np.abs(aw[supported] - energy))) if supported.any() else math.inf
    return energy, residual, aw


def _equal_potential_solve(a: np.ndarray) -> np.ndarray | None:
    """Solve A w = λ·1, Σw = 1, dropping negative weights until none remain."""
    size = a.shape[0]
    support = np.ones(size, dtype=bool)
    for _ in range(MAX_ACTIVE_SET_ROUNDS):
        idx = np.flatnonzero(support)
        try:
            u = np.linalg.solve(a[np.ix_(idx, idx)], np.ones(idx.size))
        except np.linalg.LinAlgError:
            return None
        total = float(u.sum())
        if not math.isfinite(total) or total <= 0:
            return None
        w_support = u / total
        if (w_support >= 0).all():
            w = np.zeros(size)
            w[idx] = w_support
            return w
        support[idx[w_support < 0]] = False
        if not support.any():
            return None
    return None


def _projected_gradient(a: np.ndarray, tol: float, max_iter: int) -> tuple[np.ndarray, int]:
    """Accelerated projected gradient on the simplex with exact line search.

    Each step projects a gradient step from the extrapolated point, then
    minimises the quadratic exactly on the segment from the current iterate to
    that projection, so the energy never increases. Momentum restarts whenever
    the projected point alone would raise the energy.
    """
    size = a.shape[0]
    w = np.full(size, 1.0 / size)
    z = w
    momentum, restarted = 1.0, True
    # 1/L for the gradient 2Aw; the largest row sum bounds the spectral radius
    step = 1.0 / (2.0 * max(float(np.abs(a).sum(axis=1).max()), 1e-300))
    residual = math.inf
    for iteration in range(max_iter):
        energy, residual, aw = _real_residual(a, w)
        if residual < tol:
            return w, iteration
        grad = 2.0 * (aw if restarted else a @ z)
        direction = _project_simplex(z - step * grad) - w
        # Σ direction is zero only up to rounding
        slope = 2.0 * float((aw - energy) @ direction)
        curvature = float(direction @ a @ direction)
        if not slope < 0.0:
            if restarted:
                raise NonConvergenceError("projected gradient stalled", residual)
            z, momentum, restarted = w, 1.0, True
            continue
        alpha = 1.0 if curvature <= 0.0 else min(1.0, -slope / (2.0 * curvature))
        w_next = w + alpha * direction
        if slope + curvature > 0.0:
            z, momentum, restarted = w_next, 1.0, True
        else:
            following = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * momentum * momentum))
            z = w_next + ((momentum - 1.0) / following) * (w_next - w)
            momentum, restarted = following, False
        w = w_next
    raise NonConvergenceError(f"projected gradient did not converge in {max_iter} steps", residual)


def _minimize_real(matrix: EnergyMatrix) -> MinimizationResult:
    a = np.asarray(matrix.entries, dtype=float)
    if not np.allclose(a, a.T, rtol=0.0, atol=SYMMETRY_TOL):
        raise DomainError("energy matrix is not symmetric")
    tol = settings.ORACLE_RESIDUAL_TOL

    w = _equal_potential_solve(a)
    method, iterations = "equal_potential", 0
    if w is not None:
        energy, residual, aw = _real_residual(a, w)
        if residual >= tol or (aw < energy - CERTIFICATE_SLACK).any():
            logger.debug("Equal-potential solve not certified, residual %.2e", residual)
            w = None
    if w is None:
        w, iterations = _projected_gradient(a, tol, settings.ORACLE_MAX_ITER)
        method = "projected_gradient"
    energy, residual, aw = _real_residual(a, w)
    if (aw < energy - CERTIFICATE_SLACK).any():
        raise NonConvergenceError("equilibrium certificate failed", float(np.max(energy - aw)))

    weights = w / w.sum()
    measure = DiscreteMeasure(support=matrix.cells, weights=tuple(float(x) for x in weights))
    logger.info("Real oracle: %d cells, energy %.12g via %s", matrix.size, energy, method)
    return MinimizationResult(measure, energy, residual, method, iterations)


# ---------------------------------------------------------------------------
# p-adic mode
# ---------------------------------------------------------------------------


def equitable_partition(coefficients: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    """Coarsest equitable partition of the index set by colour refinement.

    Indices start coloured by their diagonal entry; a colour class is split
    until every member sees the same multiset of (colour, entry) pairs.
    """
    size = len(coefficients)
    colours = _relabel([coefficients[i][i] for i in range(size)])
    while True:
        signatures = [
            (
                colours[i],
                tuple(sorted(Counter((colours[j], row[j]) for j in range(size)).items())),
            )
            for i, row in enumerate(coefficients)
        ]
        refined = _relabel(signatures)
        if max(refined, default=-1) == max(colours, default=-1):
            break
        colours = refined
    cells: dict[int, list[int]] = {}
    for index, colour in enumerate(colours):
        cells.setdefault(colour, []).append(index)
    return [cells[c] for c in sorted(cells)]


def _relabel(keys: Sequence[object]) -> list[int]:
    ordered = {key: rank for rank, key in enumerate(sorted(set(keys)))}  # type: ignore[type-var]
    return [ordered[key] for key in keys]


def _solve_cells(
    quotient: list[list[Fraction]], sizes: list[int], active: list[int]
) -> tuple[dict[int, Fraction], Fraction]:
    """Per-leaf weights u_D on active cells and the common potential λ."""
    dim = len(active) + 1
    matrix = [[Fraction(0)] * dim for _ in range(dim)]
    rhs = [Fraction(0)] * dim
    for row, c in enumerate(active):
        for col, d in enumerate(active):
            matrix[row][col] = quotient[c][d]
        matrix[row][-1] = Fraction(-1)
    for col, d in enumerate(active):
        matrix[-1][col] = Fraction(sizes[d])
    rhs[-1] = Fraction(1)
    solution = solve_exact(matrix, rhs)
    return dict(zip(active, solution[:-1])), solution[-1]


def _minimize_exact(matrix: EnergyMatrix) -> MinimizationResult:
    assert matrix.prime is not None
    entries = matrix.entries
    assert isinstance(entries, list)
    coefficients = [[entry.coeff for entry in row] for row in entries]
    size = len(coefficients)
    if any(coefficients[i][j] != coefficients[j][i] for i in range(size) for j in range(i)):
        raise DomainError("energy matrix is not symmetric")

    cells = equitable_partition(coefficients)
    sizes = [len(cell) for cell in cells]
    quotient = [
        [sum((coefficients[cell[0]][j] for j in other), Fraction(0)) for other in cells]
        for cell in cells
    ]
    logger.debug("Equitable partition: %d leaves in %d cells", size, len(cells))

    active = list(range(len(cells)))
    seen: set[tuple[int, ...]] = set()
    rounds = 0
    while True:
        rounds += 1
        key = tuple(active)
        if key in seen or not active:
            raise InvariantViolationError("active-set iteration cycled")
        seen.add(key)
        per_leaf, lam = _solve_cells(quotient, sizes, active)
        negative = min(active, key=lambda d: per_leaf[d])
        if per_leaf[negative] < 0:
            active.remove(negative)
            continue
        inactive = [c for c in range(len(cells)) if c not in per_leaf]
        shortfall = {
            c: sum((quotient[c][d] * u for d, u in per_leaf.items()), Fraction(0)) - lam
            for c in inactive
        }
        violator = min(inactive, key=lambda c: shortfall[c], default=None)
        if violator is not None and shortfall[violator] < 0:
            active = sorted(active + [violator])
            continue
        break

    weights = [Fraction(0)] * size
    for d, u in per_leaf.items():
        for leaf in cells[d]:
            weights[leaf] = u
    for i in range(size):
        row = coefficients[i]
        potential = sum((row[j] * weights[j] for j in range(size) if weights[j]), Fraction(0))
        if potential < lam or (weights[i] and potential != lam):
            raise InvariantViolationError(f"KKT conditions fail at leaf {i}")

    measure = DiscreteMeasure(support=matrix.cells, weights=tuple(weights))
    energy = ScaledLog(lam, matrix.prime)
    logger.info("p-adic oracle: %d leaves, energy %s", size, energy)
    return MinimizationResult(measure, energy, 0.0, "exact_kkt", rounds)


def minimize_energy(matrix: EnergyMatrix) -> MinimizationResult:
    """Minimise wᵀAw over the probability simplex.

    Raises:
        DomainError: If the matrix is not symmetric.
        NonConvergenceError: Real mode, when the iteration budget runs out.
        InvariantViolationError: p-adic mode, when the active set cycles.
    """
    if matrix.is_exact:
        return _minimize_exact(matrix)
    return _minimize_real(matrix)


# ---------------------------------------------------------------------------
# Comparisons
# ---------------------------------------------------------------------------


def shell_masses(measure: DiscreteMeasure) -> dict[int, Fraction]:
    """Leaf weights summed per shell π^k O_K^×; key 0 collects O_K."""
    masses: dict[int, Fraction] = {}
    for cell, weight in zip(measure.support, measure.weights):
        if not isinstance(cell, PAdicBallCode):
            raise DomainError("shell masses need a p-adic measure")
        v = cell.valuation()
        key = v if v is not None and v < 0 else 0
        masses[key] = masses.get(key, Fraction(0)) + Fraction(weight)
    return masses


def _real_cells(measure: DiscreteMeasure) -> list[RealCell]:
    cells = [cell for cell in measure.support if isinstance(cell, RealCell)]
    if len(cells) != len(measure.support):
        raise DomainError("expected a measure on real cells")
    return cells


def mass_in(measure: DiscreteMeasure, a: float, b: float) -> float:
    """Mass of [a, b] under the piecewise-uniform reading of a real measure."""
    total = 0.0
    for cell, weight in zip(_real_cells(measure), measure.weights):
        overlap = min(b, cell.hi) - max(a, cell.lo)
        if overlap > 0:
            total += float(weight) * overlap / cell.width
    return total


def compare_measure_real(
    minimizer: DiscreteMeasure,
    spec: RealIntervalSpec,
    bins: int = DEFAULT_BINS,
    tol: float | None = None,
) -> MeasureComparison:
    """Largest |discrete − analytic| mass over equal-mass bins of the minimiser."""
    cells = _real_cells(minimizer)
    weights = np.array([float(w) for w in minimizer.weights])
    cumulative = np.concatenate(([0.0], np.cumsum(weights)))
    edges = [-spec.r]
    for k in range(1, bins):
        target = k / bins
        i = int(np.searchsorted(cumulative[1:], target, side="left"))
        cell = cells[i]
        fraction = (target - cumulative[i]) / weights[i]
        edges.append(min(max(cell.lo + fraction * cell.width, cell.lo), cell.hi))
    edges.append(spec.r)

    analytic = tuple(mass_between(spec, lo, hi, tol) for lo, hi in zip(edges[:-1], edges[1:]))
    discrepancy = max(abs(1.0 / bins - mass) for mass in analytic)
    return MeasureComparison(discrepancy, tuple(edges), analytic)
