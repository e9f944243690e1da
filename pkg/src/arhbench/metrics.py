"""Prediction error norms, exceedance counts and consistency bounds."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .componentwise import DiagEstimate, MatrixEstimate, diag_unknown, predict
from .empirical import EmpiricalMoments, eigendecompose, moments
from .grid import BasisSystem, reconstruct_values


class Rate(str, enum.Enum):
    HALF = "half"
    THIRD = "third"

    @property
    def exponent(self) -> float:
        return 0.5 if self is Rate.HALF else 1.0 / 3.0


@dataclass(frozen=True)
class ThresholdCurve:
    """``xi(n) = (ln n)**beta / n**r`` with ``r`` one half or one third."""

    beta: float
    rate: Rate = Rate.HALF

    def __post_init__(self):
        object.__setattr__(self, "rate", Rate(self.rate))
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


def xi(curve: ThresholdCurve, n: float) -> float:
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return math.log(n) ** curve.beta / n**curve.rate.exponent


@dataclass(frozen=True)
class ErrorRecord:
    """Outcome of one method on one replication.

    A failed fit is recorded with ``error_norm = inf`` and ``failed = True``;
    it counts as an exceedance.
    """

    replication: int
    n: int
    k_n: int
    method: str
    error_norm: float
    exceeded: bool
    aux: dict = field(default_factory=dict, compare=False)
    failed: bool = False

    def __post_init__(self):
        if not self.error_norm >= 0:
            raise ValueError(f"error_norm must be nonnegative, got {self.error_norm}")


# ---------------------------------------------------------------- error norms


def _l2(diff: np.ndarray, basis: BasisSystem) -> float:
    return float(np.sqrt(max(np.dot(basis.grid.weights, diff * diff), 0.0)))


def prediction_values(model, basis: BasisSystem, last_coeffs) -> np.ndarray:
    """Curve values of ``model``'s prediction given input coefficients."""
    x = np.asarray(last_coeffs, dtype=float)
    if isinstance(model, (DiagEstimate, MatrixEstimate)):
        return reconstruct_values(predict(model, x), basis)[0]
    return np.asarray(model.predict_values(reconstruct_values(x, basis)[0]), dtype=float)


def diag_truncated_error(true_rho_diag, true_coeffs_last, model, basis: BasisSystem, k_n: int | None = None) -> float:
    """``|| sum_{j<=k} rho_j X_j phi_j - prediction ||_{L2}`` on the basis grid."""
    k = model.k_n if k_n is None else k_n
    x = np.asarray(true_coeffs_last, dtype=float)
    truth = np.zeros_like(x)
    truth[:k] = np.asarray(true_rho_diag, dtype=float)[:k] * x[:k]
    return _l2(reconstruct_values(truth, basis)[0] - prediction_values(model, basis, x), basis)


class KernelErrorMode(str, enum.Enum):
    # first term is the kernel sum_{j,k<=k_n} rho_jk phi_j(t) phi_k(s) integrated over s
    PAPER_LITERAL = "literal"
    # first term is the truncated rho applied to X_{n-1}
    APPLIED = "applied"


def kernel_truncated_error(
    true_rho_matrix,
    model,
    basis: BasisSystem,
    k_n: int,
    last_coeffs,
    mode: KernelErrorMode = KernelErrorMode.PAPER_LITERAL,
) -> float:
    rho = np.asarray(true_rho_matrix, dtype=float)[:k_n, :k_n]
    x = np.asarray(last_coeffs, dtype=float)
    mode = KernelErrorMode(mode)
    if mode is KernelErrorMode.PAPER_LITERAL:
        integrals = basis.values[:k_n] @ basis.grid.weights
        first = rho @ integrals
    else:
        first = rho @ x[:k_n]
    truth = reconstruct_values(first, basis)[0]
    return _l2(truth - prediction_values(model, basis, x), basis)


def full_error(true_rho_matrix, model, basis: BasisSystem, input_coeffs) -> float:
    """``|| rho(X) - prediction(X) ||_{L2}`` with the full ``M x M`` operator."""
    x = np.asarray(input_coeffs, dtype=float)
    rho = np.asarray(true_rho_matrix, dtype=float)
    truth = reconstruct_values(rho @ x, basis)[0]
    return _l2(truth - prediction_values(model, basis, x), basis)


def diag_operator_error(rho_hat, true_rho_diag, k_n: int | None = None) -> float:
    """``max_{j<=k} |rho_hat_j - rho_j| + sup_{j>k} |rho_j|``."""
    rho_hat = np.asarray(rho_hat, dtype=float)
    k = rho_hat.size if k_n is None else k_n
    rho = np.asarray(true_rho_diag, dtype=float)
    head = float(np.abs(rho_hat[:k] - rho[:k]).max())
    tail = float(np.abs(rho[k:]).max()) if rho.size > k else 0.0
    return head + tail


# ---------------------------------------------------------------- counts


@dataclass(frozen=True)
class ExceedanceCount:
    count: int
    total: int

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.count, self.total)

    @property
    def value(self) -> float:
        return self.count / self.total


def _count(values, threshold: float) -> ExceedanceCount:
    values = list(values)
    if not values:
        raise ValueError("no values to count")
    return ExceedanceCount(sum(1 for v in values if v > threshold), len(values))


def f_count(records, curve: ThresholdCurve) -> ExceedanceCount:
    """Share of replications whose error norm exceeds ``xi(n)``."""
    records = list(records)
    ns = {r.n for r in records}
    if len(ns) != 1:
        raise ValueError(f"records must share one sample size, got {sorted(ns)}")
    return _count((r.error_norm for r in records), xi(curve, ns.pop()))


def e_count(ub_values, n: int, curve: ThresholdCurve) -> ExceedanceCount:
    """Share of replications whose UB bound exceeds ``xi(n)``."""
    return _count(ub_values, xi(curve, n))


# ---------------------------------------------------------------- bounds


@dataclass(frozen=True)
class UBBound:
    total: float
    estimation: float
    bias: float
    eigvec: float
    tail: float


def _moments_of(data) -> EmpiricalMoments:
    return data if isinstance(data, EmpiricalMoments) else moments(data)


def ub_bound(data, C_eigs, rho_diag, k_n: int) -> UBBound:
    """Upper bound on ``max_{j<=k} |rho~_j - rho_j| + sup_{j>k} |rho_j|``.

    ``data`` holds coefficients in the true eigenbasis (or their moments).
    The four addends are ``sup |rho~_j - D_j/C_j|``, ``sup |D_j/C_j - rho_j|``,
    ``2 sum |D_j|/C_j ||phi_{n,j} - phi'_{n,j}||`` and the tail
    ``sup_{j>k} |rho_j|``, with ``D_j = <D_n phi_{n,j}, phi_{n,j}>`` and
    ``phi'_{n,j}`` the true eigenvector signed to agree with ``phi_{n,j}``.
    """
    mom = _moments_of(data)
    pair = eigendecompose(mom)
    Phi = pair.eigenvectors[:, :k_n]
    Dj = np.einsum("ij,ik,kj->j", Phi, mom.Dn, Phi)
    Cn = pair.eigenvalues[:k_n]
    C = np.asarray(C_eigs, dtype=float)
    rho = np.asarray(rho_diag, dtype=float)
    rho_tilde = Dj / Cn
    ratio = Dj / C[:k_n]
    aligned = np.zeros_like(Phi)
    idx = np.arange(k_n)
    aligned[idx, idx] = np.where(Phi[idx, idx] < 0, -1.0, 1.0)
    dist = np.linalg.norm(Phi - aligned, axis=0)
    t1 = float(np.abs(rho_tilde - ratio).max())
    t2 = float(np.abs(ratio - rho[:k_n]).max())
    t3 = 2.0 * math.fsum(np.abs(Dj) / C[:k_n] * dist)
    t4 = float(np.abs(rho[k_n:]).max()) if rho.size > k_n else 0.0
    return UBBound(t1 + t2 + t3 + t4, t1, t2, t3, t4)


def diag_unknown_operator_error(series, rho_diag, k_n: int) -> float:
    return diag_operator_error(diag_unknown(series, k_n).rho_hat, rho_diag, k_n)


def hs_offdiag_bound(data, k_n: int) -> float:
    """``sum_{j != k <= k_n} (<D_n phi_{n,j}, phi_{n,k}> / C_{n,j})**2``."""
    mom = _moments_of(data)
    pair = eigendecompose(mom)
    Phi = pair.eigenvectors[:, :k_n]
    Dt = Phi.T @ mom.Dn @ Phi
    Q = (Dt / pair.eigenvalues[:k_n, None]) ** 2
    np.fill_diagonal(Q, 0.0)
    return float(Q.sum())
