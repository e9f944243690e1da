"""Gaussian ARH(1) sample paths in coefficient space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .errors import DimensionMismatchError, InvalidSampleSizeError
from .grid import BasisSystem, Curve, reconstruct_values
from .scenario import ScenarioOperators, ScenarioSpec

RNG_ALGORITHM = "numpy.random.Generator(PCG64), seeded per replication via SeedSequence"


@dataclass(frozen=True, eq=False)
class CoeffSeries:
    """Coefficients ``X[i, j] = <X_i, phi_{j+1}>`` of a sample path ``X_0..X_{n-1}``."""

    data: np.ndarray = field(repr=False)
    seed: int | None = None
    spec: ScenarioSpec | None = None

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim != 2:
            raise DimensionMismatchError(f"series data must be 2-D, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("series data must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def M(self) -> int:
        return self.data.shape[1]

    @property
    def last(self) -> np.ndarray:
        return self.data[-1]


def replication_seed(seed_base: int, n: int, replication: int) -> int:
    """Derive a 64-bit seed for one (sample size, replication) cell."""
    ss = np.random.SeedSequence([int(seed_base), int(n), int(replication)])
    return int(ss.generate_state(1, np.uint64)[0])


def simulate(ops: ScenarioOperators, n: int, seed: int) -> CoeffSeries:
    """Draw ``X_0, ..., X_{n-1}`` from ``X_i = rho X_{i-1} + eps_i``.

    In the diagonal regime ``X_0`` is drawn from the stationary law
    ``N(0, diag(C_j))`` and each coordinate is a scalar AR(1). Otherwise the
    recursion starts from zero and the first ``spec.burn_in`` states are
    discarded.
    """
    if int(n) != n or n < 2:
        raise InvalidSampleSizeError(f"n must be an integer >= 2, got {n}")
    n = int(n)
    rng = np.random.Generator(np.random.PCG64(seed))
    M = ops.M
    L = ops.noise_chol

    if ops.is_diagonal:
        x0 = np.sqrt(ops.C_eigs) * rng.standard_normal(M)
        eps = rng.standard_normal((n - 1, M)) @ L.T
        rho = ops.rho_diag
        data = np.empty((n, M))
        data[0] = x0
        for j in range(M):
            data[1:, j] = lfilter([1.0], [1.0, -rho[j]], eps[:, j], zi=[rho[j] * x0[j]])[0]
    else:
        steps = ops.spec.burn_in + n - 1
        eps = rng.standard_normal((steps, M)) @ L.T
        rho = np.asarray(ops.rho)
        x = np.zeros(M)
        data = np.empty((n, M))
        start = ops.spec.burn_in
        if start == 0:
            data[0] = x
        for t in range(steps):
            x = rho @ x + eps[t]
            i = t + 1 - start
            if i >= 0:
                data[i] = x
    return CoeffSeries(data, seed=int(seed), spec=ops.spec)


def curves_of(series: CoeffSeries, basis: BasisSystem) -> list[Curve]:
    return [Curve(basis.grid, v) for v in curve_values(series, basis)]


def curve_values(series: CoeffSeries, basis: BasisSystem) -> np.ndarray:
    """``(n, P)`` array of the path evaluated on the basis grid."""
    if basis.M < series.M:
        raise DimensionMismatchError(
            f"basis has {basis.M} functions but the series has {series.M} coefficients"
        )
    return reconstruct_values(series.data, basis)
