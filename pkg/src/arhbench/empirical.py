"""Empirical covariance and cross-covariance operators in coefficient space."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DecompositionError, DimensionMismatchError, InvalidSampleSizeError
from .simulate import CoeffSeries

NEG_EIG_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EmpiricalMoments:
    """Lag-0 and lag-1 sample moments.

    Attributes
    ----------
    Cn : ndarray, shape (M, M)
        ``(1/n) sum_i X_i X_i^T``.
    Dn : ndarray, shape (M, M)
        ``(1/(n-1)) sum_i X_i X_{i+1}^T``, so ``Dn[j, l]`` pairs input
        coordinate ``j`` with the lead coordinate ``l``.
    """

    Cn: np.ndarray = field(repr=False)
    Dn: np.ndarray = field(repr=False)
    n: int

    @property
    def M(self) -> int:
        return self.Cn.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralPair:
    """Eigenvalues sorted descending and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    ties: tuple = ()

    @property
    def M(self) -> int:
        return self.eigenvectors.shape[0]


def _as_data(series) -> np.ndarray:
    return series.data if isinstance(series, CoeffSeries) else np.asarray(series, dtype=float)


def moments(series) -> EmpiricalMoments:
    X = _as_data(series)
    n = X.shape[0]
    if n < 2:
        raise InvalidSampleSizeError(f"need n >= 2, got {n}")
    Cn = X.T @ X / n
    Cn = (Cn + Cn.T) / 2
    Dn = X[:-1].T @ X[1:] / (n - 1)
    return EmpiricalMoments(Cn, Dn, n)


def canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so that its largest-magnitude coordinate is positive."""
    vectors = np.array(vectors, dtype=float)
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def eigendecompose(mom) -> SpectralPair:
    """Spectral decomposition of ``Cn`` (or of a symmetric matrix passed directly).

    Eigenvalues within ``-1e-10 * ||Cn||_2`` of zero are clipped to zero.
    """
    Cn = mom.Cn if isinstance(mom, EmpiricalMoments) else np.asarray(mom, dtype=float)
    if not np.all(np.isfinite(Cn)):
        raise DecompositionError("covariance matrix has non-finite entries")
    try:
        vals, vecs = np.linalg.eigh(Cn)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(str(exc)) from exc
    order = np.argsort(-vals, kind="stable")
    vals, vecs = vals[order], vecs[:, order]
    scale = max(abs(vals[0]), abs(vals[-1])) if vals.size else 0.0
    if vals.size and vals[-1] < -NEG_EIG_TOL * scale:
        raise DecompositionError(f"covariance is not PSD (eigenvalue {vals[-1]:.3g})")
    vals = np.where(vals < 0, 0.0, vals)
    return SpectralPair(vals, canonical_signs(vecs))


def sign_align(empirical: SpectralPair, reference) -> SpectralPair:
    """Flip empirical columns so that ``<phi_{n,j}, phi_j> >= 0``.

    Columns with an exactly zero inner product keep their sign and are
    listed in ``ties``.
    """
    ref = np.asarray(reference, dtype=float)
    vecs = empirical.eigenvectors
    if ref.shape != vecs.shape:
        raise DimensionMismatchError(f"reference shape {ref.shape} != {vecs.shape}")
    dots = np.einsum("ij,ij->j", vecs, ref)
    signs = np.where(dots < 0, -1.0, 1.0)
    ties = tuple(int(j) for j in np.flatnonzero(dots == 0))
    return SpectralPair(empirical.eigenvalues, vecs * signs, ties)


def project_onto(series, pair: SpectralPair) -> CoeffSeries:
    """Rotate coefficients into the eigenvector frame, ``X @ Phi``."""
    X = _as_data(series)
    if X.shape[1] != pair.eigenvectors.shape[0]:
        raise DimensionMismatchError(
            f"series has {X.shape[1]} coefficients, eigenvectors have {pair.eigenvectors.shape[0]}"
        )
    rotated = X @ pair.eigenvectors
    if isinstance(series, CoeffSeries):
        return CoeffSeries(rotated, seed=series.seed, spec=series.spec)
    return CoeffSeries(rotated)
