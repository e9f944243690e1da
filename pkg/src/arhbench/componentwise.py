"""Componentwise ARH(1) estimators on (empirical) eigenvectors of the covariance.

Four estimators share one layout. The diagonal estimators fit one scalar
AR(1) coefficient per retained component, either in the true eigenbasis
(``diag_known``) or in the empirical one (``diag_unknown``). ``bosq`` fits the
full ``k_n x k_n`` matrix on empirical eigenvectors and ``guillas`` does the
same with the inverse eigenvalues floored at ``u_n``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .empirical import SpectralPair, eigendecompose, moments
from .errors import DimensionMismatchError, InvalidSampleSizeError, TruncationTooDeepError, ZeroEnergyError
from .simulate import CoeffSeries

DEFAULT_E_PRIME = 1.7
DEFAULT_BETA_U = 0.9


class TruncationKind(str, enum.Enum):
    LOG_CEIL = "log"
    POWER_RATE = "power"
    ROOT_ALPHA = "root"


@dataclass(frozen=True)
class TruncationRule:
    """Rule producing the number ``k_n`` of retained components.

    ``rounding`` is ``"ceil"`` or ``"floor"``; ``offset`` is added after
    rounding. The published tables use values one below the ceiling at
    several sample sizes, which ``rounding="floor"`` reproduces.
    """

    kind: TruncationKind = TruncationKind.LOG_CEIL
    e_prime: float = DEFAULT_E_PRIME
    alpha: float | None = None
    rounding: str = "ceil"
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", TruncationKind(self.kind))
        if self.rounding not in ("ceil", "floor"):
            raise ValueError(f"rounding must be 'ceil' or 'floor', got {self.rounding!r}")
        if self.kind is TruncationKind.ROOT_ALPHA and not (self.alpha and self.alpha > 0):
            raise ValueError("root rule needs a positive alpha")


def k_of(rule: TruncationRule, n: int, delta1: float | None = None) -> int:
    if n < 2:
        raise InvalidSampleSizeError(f"need n >= 2, got {n}")
    if rule.kind is TruncationKind.LOG_CEIL:
        raw = math.log(n)
    elif rule.kind is TruncationKind.POWER_RATE:
        if delta1 is None:
            raise ValueError("power rule needs delta1")
        raw = rule.e_prime * n ** (1.0 / (8.0 * delta1 + 2.0))
    else:
        raw = n ** (1.0 / rule.alpha)
    k = math.ceil(raw) if rule.rounding == "ceil" else math.floor(raw)
    return int(min(max(k + rule.offset, 1), n - 1))


@dataclass(frozen=True, eq=False)
class DiagEstimate:
    """Diagonal estimate ``rho_hat[j]`` for the first ``k_n`` components.

    ``eigvecs`` is ``None`` when the coordinates already are the true
    eigenbasis.
    """

    k_n: int
    rho_hat: np.ndarray = field(repr=False)
    eigvecs: SpectralPair | None = field(default=None, repr=False)

    def predict(self, last_coeffs) -> np.ndarray:
        return predict(self, last_coeffs)


@dataclass(frozen=True, eq=False)
class MatrixEstimate:
    """Matrix estimate on empirical eigenvectors.

    ``rho_matrix[l, j]`` maps input component ``j`` to output component ``l``.
    """

    k_n: int
    rho_matrix: np.ndarray = field(repr=False)
    eigvecs: SpectralPair = field(repr=False)
    u_n: float | None = None

    def predict(self, last_coeffs) -> np.ndarray:
        return predict(self, last_coeffs)


def _data(series) -> np.ndarray:
    X = series.data if isinstance(series, CoeffSeries) else np.asarray(series, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 2:
        raise InvalidSampleSizeError(f"need n >= 2, got {X.shape[0]}")
    return X


def _check_k(k_n: int, M: int, n: int):
    if not 1 <= k_n <= M:
        raise TruncationTooDeepError(f"k_n = {k_n} outside [1, {M}]")
    if k_n >= n:
        raise TruncationTooDeepError(f"k_n = {k_n} must be below n = {n}")


def diag_ratio(X: np.ndarray) -> np.ndarray:
    """Columnwise ``(n/(n-1)) sum x_i x_{i+1} / sum x_i^2``."""
    n = X.shape[0]
    num = np.einsum("ij,ij->j", X[:-1], X[1:])
    den = np.einsum("ij,ij->j", X, X)
    if np.any(den <= 0):
        bad = int(np.flatnonzero(den <= 0)[0]) + 1
        raise ZeroEnergyError(f"component {bad} has zero empirical energy")
    return (n / (n - 1)) * num / den


def diag_known(series, k_n: int, C_basis_is_generating: bool = True) -> DiagEstimate:
    """Diagonal estimator when the coordinates are the true eigenbasis of C."""
    if not C_basis_is_generating:
        raise ValueError("diag_known needs coefficients in the true eigenbasis; use diag_unknown")
    X = _data(series)
    _check_k(k_n, X.shape[1], X.shape[0])
    rho = diag_ratio(X[:, :k_n])
    rho.setflags(write=False)
    return DiagEstimate(k_n, rho)


def _spectral(X: np.ndarray, k_n: int) -> tuple[SpectralPair, np.ndarray, np.ndarray]:
    """Eigenpairs of Cn, rotated data and the rotated lag-1 block ``D~[:k, :k]``."""
    n, M = X.shape
    _check_k(k_n, M, n)
    pair = eigendecompose(moments(X))
    if not pair.eigenvalues[k_n - 1] > 0:
        raise TruncationTooDeepError(
            f"empirical eigenvalue C_n,{k_n} = {pair.eigenvalues[k_n - 1]:.3g} is not positive"
        )
    Xt = X @ pair.eigenvectors[:, :k_n]
    Dt = Xt[:-1].T @ Xt[1:] / (n - 1)
    return pair, Xt, Dt


def diag_unknown(series, k_n: int) -> DiagEstimate:
    """Diagonal estimator on empirical eigenvectors, ``D_{n,j} / C_{n,j}``."""
    X = _data(series)
    pair, _, Dt = _spectral(X, k_n)
    # reciprocal multiply, exactly as in bosq, so k_n = 1 agrees bitwise
    rho = np.diag(Dt) * (1.0 / pair.eigenvalues[:k_n])
    rho.setflags(write=False)
    return DiagEstimate(k_n, rho, pair)


def _matrix(Dt: np.ndarray, inv_c: np.ndarray) -> np.ndarray:
    # output l, input j: D~[j, l] / C_j
    R = Dt.T * inv_c[None, :]
    R.setflags(write=False)
    return R


def bosq(series, k_n: int) -> MatrixEstimate:
    X = _data(series)
    pair, _, Dt = _spectral(X, k_n)
    return MatrixEstimate(k_n, _matrix(Dt, 1.0 / pair.eigenvalues[:k_n]), pair)


def guillas(series, k_n: int, beta_u: float = DEFAULT_BETA_U, true_C_eigs=None) -> MatrixEstimate:
    """Bosq's estimator with ``1 / max(C_{n,j}, u_n)``, ``u_n = beta_u * C_{k_n}``.

    ``C_{k_n}`` is the true eigenvalue when ``true_C_eigs`` is given and the
    empirical one otherwise.
    """
    if not 0 < beta_u < 1:
        raise ValueError(f"beta_u must lie in (0, 1), got {beta_u}")
    X = _data(series)
    pair, _, Dt = _spectral(X, k_n)
    ref = pair.eigenvalues if true_C_eigs is None else np.asarray(true_C_eigs, dtype=float)
    u_n = beta_u * float(ref[k_n - 1])
    inv_c = 1.0 / np.maximum(pair.eigenvalues[:k_n], u_n)
    return MatrixEstimate(k_n, _matrix(Dt, inv_c), pair, u_n)


@dataclass(frozen=True)
class Prop2Report:
    """Finite-sample values of the spectral-gap admissibility conditions."""

    Lambda: float
    a: tuple
    lambda_ratio: float
    k_C: float
    a_ratio: float


def check_prop2_conditions(C_eigs, k_n: int, n: int, beta: float) -> Prop2Report:
    C = np.asarray(C_eigs, dtype=float)
    if not 1 <= k_n < C.size:
        raise ValueError(f"need 1 <= k_n < {C.size}, got {k_n}")
    gaps = C[:-1] - C[1:]
    if np.any(gaps <= 0):
        raise ValueError("eigenvalues must be strictly decreasing")
    inv = 1.0 / gaps
    Lambda = float(inv[:k_n].max())
    a = [2 * math.sqrt(2) * inv[0]]
    for j in range(1, k_n):
        a.append(2 * math.sqrt(2) * max(inv[j - 1], inv[j]))
    ln = math.log(n)
    return Prop2Report(
        Lambda=Lambda,
        a=tuple(float(x) for x in a),
        lambda_ratio=Lambda * ln ** (0.5 - beta) / n**0.25,
        k_C=k_n * float(C[k_n - 1]),
        a_ratio=math.fsum(a) / C[k_n - 1] * ln**beta / n**0.25,
    )


def predict(model, last_coeffs) -> np.ndarray:
    """Plug-in one-step prediction in the coordinates of ``last_coeffs``."""
    x = np.asarray(last_coeffs, dtype=float)
    k = model.k_n
    if model.eigvecs is None:
        if x.shape[0] < k:
            raise DimensionMismatchError(f"input has {x.shape[0]} coefficients, model needs {k}")
        out = np.zeros_like(x)
        out[:k] = model.rho_hat * x[:k]
        return out
    Phi = model.eigvecs.eigenvectors[:, :k]
    if x.shape[0] != Phi.shape[0]:
        raise DimensionMismatchError(f"input has {x.shape[0]} coefficients, model has {Phi.shape[0]}")
    xt = Phi.T @ x
    yt = model.rho_hat * xt if isinstance(model, DiagEstimate) else model.rho_matrix @ xt
    return Phi @ yt
