"""Quadrature grids, the scenario sine basis and coefficient projection.

Curves are stored as their values on a :class:`Grid`; inner products use the
trapezoidal rule, which is exact for the piecewise-linear interpolant of the
stored values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AliasingError, DimensionMismatchError, GridMismatchError, InvalidIntervalError

DEFAULT_GRAM_TOL = 1e-3
QUADRATURE_STEP = 0.01
OUTPUT_STEP = 0.06


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Grid:
    """Discretization of ``[a, b]`` with trapezoidal weights.

    The last subinterval is shorter than ``step`` whenever ``(b - a) / step``
    is not an integer.
    """

    a: float
    b: float
    step: float
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def length(self) -> float:
        return self.b - self.a

    def same_as(self, other: "Grid") -> bool:
        return self is other or (
            self.size == other.size and np.array_equal(self.points, other.points)
        )


def make_grid(a: float, b: float, step: float) -> Grid:
    """Build the grid ``{a, a + step, ...}`` closed off by ``b``."""
    a, b, step = float(a), float(b), float(step)
    if not (np.isfinite(a) and np.isfinite(b) and a < b):
        raise InvalidIntervalError(f"need a < b, got a={a}, b={b}")
    if not (0.0 < step < b - a):
        raise InvalidIntervalError(f"step must lie in (0, b - a), got {step}")
    n_full = int(np.floor((b - a) / step + 1e-9))
    points = a + step * np.arange(n_full + 1)
    # a + k*step landing on b up to rounding counts as b itself
    if b - points[-1] > 1e-9 * step:
        points = np.append(points, b)
    else:
        points[-1] = b
    h = np.diff(points)
    weights = np.zeros_like(points)
    weights[:-1] += h / 2
    weights[1:] += h / 2
    return Grid(a, b, step, _frozen(points), _frozen(weights))


def dyadic_grid(a: float, b: float, level: int) -> Grid:
    """Grid of ``2**level`` equispaced points including both endpoints."""
    return make_grid(a, b, (b - a) / (2**level - 1))


@dataclass(frozen=True, eq=False)
class Curve:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen(self.values)
        if values.shape != (self.grid.size,):
            raise DimensionMismatchError(
                f"curve has {values.shape} values on a grid of {self.grid.size} points"
            )
        object.__setattr__(self, "values", values)

    def __add__(self, other: "Curve") -> "Curve":
        _check_same_grid(self.grid, other.grid)
        return Curve(self.grid, self.values + other.values)

    def __sub__(self, other: "Curve") -> "Curve":
        _check_same_grid(self.grid, other.grid)
        return Curve(self.grid, self.values - other.values)

    def __mul__(self, scalar: float) -> "Curve":
        return Curve(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.sqrt(max(inner_product(self, self), 0.0)))


@dataclass(frozen=True, eq=False)
class BasisSystem:
    """Orthonormal sine functions sampled on a grid.

    Attributes
    ----------
    values : ndarray, shape (M, P)
        ``values[j, p]`` is the (j+1)-th basis function at ``grid.points[p]``.
    gram_defect : float
        ``max |<phi_j, phi_k> - delta_jk|`` under the grid quadrature.
    """

    grid: Grid
    M: int
    values: np.ndarray = field(repr=False)
    gram_defect: float

    def function(self, j: int) -> Curve:
        """Return the 1-based basis function ``phi_j`` as a curve."""
        return Curve(self.grid, self.values[j - 1])


def sine_basis(grid: Grid, M: int, tol: float = DEFAULT_GRAM_TOL) -> BasisSystem:
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    L = grid.length
    j = np.arange(1, M + 1)[:, None]
    values = np.sqrt(2.0 / L) * np.sin(np.pi * j * (grid.points[None, :] - grid.a) / L)
    gram = (values * grid.weights) @ values.T
    defect = float(np.abs(gram - np.eye(M)).max())
    if defect > tol:
        raise AliasingError(
            f"gram defect {defect:.3g} exceeds {tol:g}: step {grid.step} undersamples mode {M}"
        )
    return BasisSystem(grid, M, _frozen(values), defect)


def _check_same_grid(g1: Grid, g2: Grid):
    if not g1.same_as(g2):
        raise GridMismatchError("curves live on different grids")


def inner_product(f: Curve, g: Curve) -> float:
    _check_same_grid(f.grid, g.grid)
    return float(np.dot(f.grid.weights, f.values * g.values))


def project(curve: Curve, basis: BasisSystem) -> np.ndarray:
    """Coefficients ``<curve, phi_j>`` for j = 1..M."""
    _check_same_grid(curve.grid, basis.grid)
    return basis.values @ (basis.grid.weights * curve.values)


def project_values(values: np.ndarray, basis: BasisSystem) -> np.ndarray:
    """Row-wise :func:`project` for an ``(n, P)`` array of curve values."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != basis.grid.size:
        raise GridMismatchError("values do not match the basis grid")
    return (values * basis.grid.weights) @ basis.values.T


def reconstruct(coeffs, basis: BasisSystem) -> Curve:
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.ndim != 1 or coeffs.shape[0] > basis.M:
        raise DimensionMismatchError(
            f"need at most {basis.M} coefficients, got shape {coeffs.shape}"
        )
    return Curve(basis.grid, coeffs @ basis.values[: coeffs.shape[0]])


def reconstruct_values(coeffs: np.ndarray, basis: BasisSystem) -> np.ndarray:
    """Row-wise :func:`reconstruct`, returning an ``(n, P)`` array."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    if coeffs.shape[1] > basis.M:
        raise DimensionMismatchError(
            f"need at most {basis.M} coefficients per row, got {coeffs.shape[1]}"
        )
    return coeffs @ basis.values[: coeffs.shape[1]]
