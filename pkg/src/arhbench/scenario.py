"""Data-generating operators for the diagonal, pseudo-diagonal and non-diagonal regimes.

Everything lives in the coordinates of the sine eigenbasis of the
autocovariance operator: ``C`` is ``diag(C_j)``, ``rho`` and the innovation
covariance are ``M x M`` matrices.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InstabilityError, InvalidSpecError, MonotonicityError, NotPSDError


class Regime(str, enum.Enum):
    DIAGONAL = "diagonal"
    PSEUDO_DIAGONAL = "pseudo-diagonal"
    NON_DIAGONAL = "non-diagonal"


class NoiseOffDiagonal(str, enum.Enum):
    # exp(-|j-h|^2 / W) used as a correlation, scaled by sigma_j * sigma_h
    CORRELATION = "correlation"
    # exp(-|j-h|^2 / W) used as the covariance entry itself; indefinite for M = 50
    LITERAL = "literal"


@dataclass(frozen=True)
class ScenarioSpec:
    regime: Regime = Regime.DIAGONAL
    delta1: float = 1.5
    delta2: float = 1.1
    c1: float = 1.0
    c2: float = 0.8
    W: float = 0.2
    invK: float = 0.275
    M: int = 50
    burn_in: int = 500
    seed: int = 0
    noise_offdiag: NoiseOffDiagonal = NoiseOffDiagonal.CORRELATION

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        object.__setattr__(self, "noise_offdiag", NoiseOffDiagonal(self.noise_offdiag))
        if not self.delta1 > 1:
            raise InvalidSpecError(f"delta1 must exceed 1 (trace class), got {self.delta1}")
        if not 0 < self.c2 < 1:
            raise InstabilityError(f"c2 must lie in (0, 1), got {self.c2}")
        if not self.c1 > 0:
            raise InvalidSpecError(f"c1 must be positive, got {self.c1}")
        if self.M < 1 or self.burn_in < 0:
            raise InvalidSpecError("M must be >= 1 and burn_in >= 0")
        if self.W <= 0:
            raise InvalidSpecError(f"W must be positive, got {self.W}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["regime"] = self.regime.value
        d["noise_offdiag"] = self.noise_offdiag.value
        return d


@dataclass(frozen=True, eq=False)
class ScenarioOperators:
    spec: ScenarioSpec
    C_eigs: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    noise_cov: np.ndarray = field(repr=False)
    noise_chol: np.ndarray = field(repr=False)

    @property
    def M(self) -> int:
        return self.spec.M

    @property
    def rho_diag(self) -> np.ndarray:
        return np.diag(self.rho).copy()

    @property
    def is_diagonal(self) -> bool:
        return self.spec.regime is Regime.DIAGONAL


def _lag(M: int) -> np.ndarray:
    j = np.arange(M)
    return np.abs(j[:, None] - j[None, :])


def c_eigenvalues(spec: ScenarioSpec) -> np.ndarray:
    j = np.arange(1, spec.M + 1, dtype=float)
    return spec.c1 * j ** (-spec.delta1)


def build_rho(spec: ScenarioSpec) -> np.ndarray:
    j = np.arange(1, spec.M + 1, dtype=float)
    lag = _lag(spec.M)
    if spec.regime is Regime.DIAGONAL:
        rho = np.zeros((spec.M, spec.M))
    elif spec.regime is Regime.PSEUDO_DIAGONAL:
        rho = np.exp(-lag / spec.W)
    else:
        rho = spec.invK / (lag.astype(float) ** 2 + 1.0)
    np.fill_diagonal(rho, spec.c2 * j ** (-spec.delta2))
    norm = np.linalg.norm(rho, 2)
    if norm >= 1:
        raise InstabilityError(f"operator norm of rho is {norm:.6g} >= 1")
    return rho


def build_noise_cov(spec: ScenarioSpec, C_eigs: np.ndarray, rho: np.ndarray) -> np.ndarray:
    var = C_eigs * (1.0 - np.diag(rho) ** 2)
    if spec.regime is Regime.DIAGONAL:
        return np.diag(var)
    kernel = np.exp(-(_lag(spec.M).astype(float) ** 2) / spec.W)
    if spec.noise_offdiag is NoiseOffDiagonal.CORRELATION:
        sd = np.sqrt(var)
        cov = kernel * np.outer(sd, sd)
    else:
        cov = kernel
    np.fill_diagonal(cov, var)
    return (cov + cov.T) / 2


def cholesky_with_jitter(cov: np.ndarray) -> np.ndarray:
    """Cholesky factor, retrying once with ``1e-12 * trace / M`` on the diagonal."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-12 * np.trace(cov) / cov.shape[0]
    try:
        return np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
    except np.linalg.LinAlgError:
        min_eig = np.linalg.eigvalsh(cov).min()
        raise NotPSDError(
            f"innovation covariance is not positive semidefinite (min eigenvalue {min_eig:.3g})"
        ) from None


def validate(spec: ScenarioSpec) -> ScenarioOperators:
    C = c_eigenvalues(spec)
    if not (np.all(C > 0) and np.all(np.diff(C) < 0)):
        raise MonotonicityError("eigenvalues of C must be positive and strictly decreasing")
    rho = build_rho(spec)
    cov = build_noise_cov(spec, C, rho)
    chol = cholesky_with_jitter(cov)
    for arr in (C, rho, cov, chol):
        arr.setflags(write=False)
    return ScenarioOperators(spec, C, rho, cov, chol)
