"""Curve-level predictors built on smoothing.

Three competitors of the componentwise estimators:

* a wavelet-smoothed componentwise predictor (linear shrinkage of detail
  coefficients, then FPCA of the smoothed, centered curves),
* a penalized FPCA predictor using a discrete second-difference penalty,
* a Gaussian kernel predictor on pre-smoothed curves.

Curves are ``(n, P)`` value matrices on a shared :class:`~arhbench.grid.Grid`;
inner products use the grid's trapezoidal weights.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .empirical import canonical_signs
from .errors import GridMismatchError, InvalidSampleSizeError, RankDeficiencyError
from .grid import Curve, Grid
from .wavelets import WaveletFamily, dwt, idwt

DEFAULT_KERNEL_PENALTY = 1e-3
PINV_RTOL = 1e-12


@dataclass(frozen=True)
class WaveletConfig:
    """Wavelet smoothing settings.

    ``lam`` is the shrinkage parameter; when ``None`` it is estimated as
    ``(sum sigma_j^2)(sum C_j) / N`` with ``N = 2**J`` dyadic points.
    """

    family: WaveletFamily = WaveletFamily.HAAR
    j0: int = 3
    J: int = 6
    lam: float | None = None
    M_spec: int = 50

    def __post_init__(self):
        object.__setattr__(self, "family", WaveletFamily(self.family))
        if not 0 <= self.j0 < self.J:
            raise ValueError(f"need 0 <= j0 < J, got j0={self.j0}, J={self.J}")
        if self.lam is not None and self.lam < 0:
            raise ValueError("lam must be nonnegative")


@dataclass(frozen=True)
class SmootherConfig:
    ell: float = 0.0
    q: int = 5

    def __post_init__(self):
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")
        if self.ell < 0:
            raise ValueError(f"ell must be nonnegative, got {self.ell}")


@dataclass(frozen=True)
class KernelConfig:
    h: float = 0.25
    smooth_penalty: float = DEFAULT_KERNEL_PENALTY

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"bandwidth must be positive, got {self.h}")
        if self.smooth_penalty < 0:
            raise ValueError("smooth_penalty must be nonnegative")


def _stack(curves) -> tuple[Grid, np.ndarray]:
    curves = list(curves)
    if not curves:
        raise InvalidSampleSizeError("no curves given")
    grid = curves[0].grid
    for c in curves[1:]:
        if not c.grid.same_as(grid):
            raise GridMismatchError("curves live on different grids")
    return grid, np.vstack([c.values for c in curves])


# ---------------------------------------------------------------- wavelets


def smoothing_parameter(cfg: WaveletConfig, scenario=None, curves=None) -> float:
    """``cfg.lam`` if set, else ``(sum sigma_j^2)(sum C_j) / 2**J``.

    With a scenario the sums use its first ``M_spec`` innovation variances
    and eigenvalues. Without one they are estimated from ``curves``: the
    empirical eigenvalues ``C_{n,j}`` and the per-component AR(1) residual
    variances ``C_{n,j} - D_{n,j}^2 / C_{n,j}``.
    """
    if cfg.lam is not None:
        return float(cfg.lam)
    N = 2**cfg.J
    if scenario is not None:
        m = min(cfg.M_spec, scenario.M)
        sig2 = np.diag(scenario.noise_cov)[:m].sum()
        return float(sig2 * scenario.C_eigs[:m].sum() / N)
    if curves is None or len(curves) < 3:
        raise ValueError("need a scenario or at least 3 curves to estimate the smoothing parameter")
    grid, V = _stack(curves)
    Z = (V - V.mean(axis=0)) * np.sqrt(grid.weights)
    n = Z.shape[0]
    _, s, Vt = np.linalg.svd(Z, full_matrices=False)
    C = s**2 / n
    keep = C > PINV_RTOL * max(C.sum(), np.finfo(float).tiny)
    scores = Z @ Vt[keep].T
    D = np.einsum("ij,ij->j", scores[:-1], scores[1:]) / (n - 1)
    sig2 = np.clip(C[keep] - D**2 / C[keep], 0.0, None)
    return float(sig2.sum() * C.sum() / N)


def _dyadic_points(grid: Grid, J: int) -> np.ndarray | None:
    if grid.size == 2**J:
        return None
    return np.linspace(grid.a, grid.b, 2**J)


def wavelet_smooth_values(V: np.ndarray, grid: Grid, cfg: WaveletConfig, lam: float) -> np.ndarray:
    """Row-wise wavelet smoothing of an ``(n, P)`` value matrix."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    t = _dyadic_points(grid, cfg.J)
    out = np.empty_like(V)
    shrink = 1.0 / (1.0 + lam)
    for i, row in enumerate(V):
        x = row if t is None else np.interp(t, grid.points, row)
        coeffs = dwt(x, cfg.family, cfg.j0)
        coeffs = [coeffs[0]] + [d * shrink for d in coeffs[1:]]
        y = idwt(coeffs, cfg.family)
        out[i] = y if t is None else np.interp(grid.points, t, y)
    return out


def wavelet_smooth(curve: Curve, cfg: WaveletConfig, scenario=None) -> Curve:
    """Shrink detail coefficients at levels ``>= j0`` by ``1 / (1 + lam)``.

    Curves whose grid does not have ``2**J`` points are linearly
    interpolated onto ``2**J`` equispaced points and back. A single curve
    carries no variance information, so ``cfg.lam`` or ``scenario`` must be
    given.
    """
    lam = smoothing_parameter(cfg, scenario)
    return Curve(curve.grid, wavelet_smooth_values(curve.values, curve.grid, cfg, lam)[0])


@dataclass(frozen=True, eq=False)
class FunctionalPredictor:
    """One-step predictor acting on curves through a finite expansion.

    The prediction for an input ``x`` is ``basis.T @ (R @ (basis W x))`` with
    ``W`` the quadrature weights, i.e. coordinates are L2 inner products with
    the rows of ``basis``.

    Attributes
    ----------
    basis : ndarray, shape (k, P)
        L2-orthonormal functions on ``grid``.
    R : ndarray, shape (k, k)
        ``R[l, j]`` maps input coordinate ``j`` to output coordinate ``l``.
    """

    grid: Grid
    basis: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    method: str = ""
    lam: float | None = None

    @property
    def k(self) -> int:
        return self.basis.shape[0]

    def coordinates(self, values) -> np.ndarray:
        return self.basis @ (self.grid.weights * np.asarray(values, dtype=float))

    def predict_values(self, values) -> np.ndarray:
        return (self.R @ self.coordinates(values)) @ self.basis

    def predict(self, query: Curve) -> Curve:
        return Curve(self.grid, self.predict_values(query.values))


def _l2_fpca(Y: np.ndarray, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and L2-orthonormal eigenfunctions of ``(1/n) sum Y_i (x) Y_i``."""
    sw = np.sqrt(grid.weights)
    n = Y.shape[0]
    _, s, Vt = np.linalg.svd(Y * sw, full_matrices=False)
    U = canonical_signs(Vt.T)
    return s**2 / n, (U / sw[:, None]).T


def as_predictor(curves, k_n: int, cfg: WaveletConfig, scenario=None) -> FunctionalPredictor:
    """Wavelet-smoothed componentwise predictor.

    Curves are smoothed and centered into ``Y_i``; with ``(C_k, phi_k)`` the
    FPCA of the ``Y_i`` and ``Y_{i,k} = <Y_i, phi_k>``, output coordinate
    ``j`` of the prediction for ``x`` is
    ``(1/(n-1)) sum_k sum_i <phi_k, x> Y_{i,k} Y_{i+1,j} / C_k``.
    """
    grid, V = _stack(curves)
    n = V.shape[0]
    if n < 3:
        raise InvalidSampleSizeError(f"need at least 3 curves, got {n}")
    if k_n < 1:
        raise ValueError("k_n must be >= 1")
    lam = smoothing_parameter(cfg, scenario, curves=curves)
    S = wavelet_smooth_values(V, grid, cfg, lam)
    Y = S - S.mean(axis=0)
    C, phi = _l2_fpca(Y, grid)
    if k_n > C.size or not C[k_n - 1] > 0:
        raise RankDeficiencyError(f"smoothed covariance has no positive eigenvalue at k = {k_n}")
    phi, C = phi[:k_n], C[:k_n]
    scores = Y @ (phi * grid.weights).T
    R = (scores[1:].T @ scores[:-1]) / (n - 1) / C[None, :]
    return FunctionalPredictor(grid, phi, R, C, method="wavelet", lam=lam)


# ---------------------------------------------------------------- penalized FPCA


def second_difference(points: np.ndarray) -> np.ndarray:
    """``(P-2, P)`` second divided differences; annihilates affine functions."""
    t = np.asarray(points, dtype=float)
    h = np.diff(t)
    P = t.size
    D = np.zeros((P - 2, P))
    r = np.arange(P - 2)
    s = 2.0 / (h[:-1] + h[1:])
    D[r, r] = s / h[:-1]
    D[r, r + 1] = -s * (1.0 / h[:-1] + 1.0 / h[1:])
    D[r, r + 2] = s / h[1:]
    return D


def penalty_matrix(grid: Grid) -> np.ndarray:
    """``K = D2^T W D2`` with interior quadrature weights."""
    D = second_difference(grid.points)
    return D.T @ (grid.weights[1:-1, None] * D)


@functools.lru_cache(maxsize=16)
def _penalty_spectrum(points_key: bytes, P: int):
    t = np.frombuffer(points_key, dtype=float, count=P)
    D = second_difference(t)
    w = np.empty(P)
    h = np.diff(t)
    w[0], w[-1] = h[0] / 2, h[-1] / 2
    w[1:-1] = (h[:-1] + h[1:]) / 2
    K = D.T @ (w[1:-1, None] * D)
    # split off the affine null space exactly, then diagonalize the rest
    Qfull, _ = np.linalg.qr(np.column_stack([np.ones(P), t - t.mean()]), mode="complete")
    Q, Qp = Qfull[:, :2], Qfull[:, 2:]
    Kp = Qp.T @ K @ Qp
    mu, U = np.linalg.eigh((Kp + Kp.T) / 2)
    mu = np.clip(mu, 0.0, None)
    return Q, Qp @ U, mu


def hat_operator(grid: Grid, ell: float, power: float = 1.0) -> np.ndarray:
    """``A(ell)**power`` for ``A(ell) = (I + ell K)^{-1}``, symmetric with spectrum in (0, 1]."""
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    P = grid.size
    if ell == 0:
        return np.eye(P)
    Q, V, mu = _penalty_spectrum(grid.points.tobytes(), P)
    f = (1.0 / (1.0 + ell * mu)) ** power
    return Q @ Q.T + (V * f) @ V.T


def penalized_smoother(curves, ell: float) -> tuple[list[Curve], np.ndarray]:
    """Smooth every curve with ``A(ell)``; returns the curves and ``A(ell)``."""
    grid, V = _stack(curves)
    A = hat_operator(grid, ell)
    return [Curve(grid, row) for row in V @ A], A


def penalty_seminorm(grid: Grid, values) -> float:
    """``sqrt(x^T K x)``, the discrete L2 norm of the second derivative."""
    D = second_difference(grid.points)
    d = D @ np.asarray(values, dtype=float)
    return float(np.sqrt(np.dot(grid.weights[1:-1], d * d)))


def _l2_orthonormalize(B: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Rows of ``B`` made orthonormal under ``<f, g> = sum w f g``."""
    sw = np.sqrt(w)
    Q, _ = np.linalg.qr((B * sw).T)
    return (Q / sw[:, None]).T


def _solve_psd(C: np.ndarray, D: np.ndarray) -> np.ndarray:
    """``D C^+`` dropping eigenvalues of ``C`` below ``1e-12 * trace``."""
    vals, vecs = np.linalg.eigh((C + C.T) / 2)
    tr = vals.clip(min=0).sum()
    keep = vals > PINV_RTOL * tr
    if tr <= 0 or not keep.any():
        raise RankDeficiencyError("projected covariance is zero")
    inv = (vecs[:, keep] / vals[keep]) @ vecs[:, keep].T
    return D @ inv


def besse_penalized_predictor(curves, cfg: SmootherConfig) -> FunctionalPredictor:
    """Penalized FPCA predictor ``D_{q,ell} C_{q,ell}^{-1}``.

    The top ``q`` eigenvectors ``v_j`` of ``S = (1/n) A^{1/2} X^T X A^{1/2}``
    give the space spanned by ``A v_j``; smoothed curves ``A x_i`` are
    projected onto it in L2 and the lag-0 and lag-1 moments are formed there.
    """
    grid, V = _stack(curves)
    n, P = V.shape
    if n < 3:
        raise InvalidSampleSizeError(f"need at least 3 curves, got {n}")
    if cfg.q > min(n, P):
        raise ValueError(f"q = {cfg.q} exceeds min(n, P) = {min(n, P)}")
    A = hat_operator(grid, cfg.ell)
    Ah = hat_operator(grid, cfg.ell, 0.5)
    XA = V @ Ah
    _, s, Vt = np.linalg.svd(XA, full_matrices=False)
    v = canonical_signs(Vt[: cfg.q].T).T
    E = _l2_orthonormalize(v @ A, grid.weights)
    E = canonical_signs(E.T).T
    c = (V @ A) @ (E * grid.weights).T
    Cmat = c.T @ c / n
    Dmat = c[1:].T @ c[:-1] / (n - 1)
    R = _solve_psd(Cmat, Dmat)
    return FunctionalPredictor(grid, E, R, s[: cfg.q] ** 2 / n, method="besse")


# ---------------------------------------------------------------- kernel


@dataclass(frozen=True, eq=False)
class KernelPrediction:
    curve: Curve
    weights: np.ndarray = field(repr=False)
    degenerate: bool = False


def gaussian_kernel(u):
    return np.exp(-0.5 * np.square(u))


def kernel_weights(distances_sq: np.ndarray, h: float) -> tuple[np.ndarray, bool]:
    """Normalized weights ``K(d_i / h) / sum K``.

    The weights are computed relative to the closest curve so they never
    underflow; ``degenerate`` reports whether the unshifted sum would have
    underflowed to zero, in which case the result is the nearest-neighbour
    limit.
    """
    u = np.asarray(distances_sq, dtype=float) / h
    raw = gaussian_kernel(u)
    degenerate = not raw.sum() > 0
    logk = -0.5 * u**2
    w = np.exp(logk - logk.max())
    return w / w.sum(), degenerate


@dataclass(frozen=True, eq=False)
class KernelPredictor:
    grid: Grid
    smoothed: np.ndarray = field(repr=False)
    cfg: KernelConfig

    def predict_full(self, query: Curve) -> KernelPrediction:
        X = self.smoothed
        diff = X[:-1] - query.values
        d2 = np.maximum(diff**2 @ self.grid.weights, 0.0)
        w, degenerate = kernel_weights(d2, self.cfg.h)
        return KernelPrediction(Curve(self.grid, w @ X[1:]), w, degenerate)

    def predict(self, query: Curve) -> Curve:
        return self.predict_full(query).curve

    def predict_values(self, values) -> np.ndarray:
        return self.predict(Curve(self.grid, values)).values


def fit_kernel(curves, cfg: KernelConfig) -> KernelPredictor:
    grid, V = _stack(curves)
    if V.shape[0] < 2:
        raise InvalidSampleSizeError("need at least 2 curves")
    X = V @ hat_operator(grid, cfg.smooth_penalty)
    X.setflags(write=False)
    return KernelPredictor(grid, X, cfg)


def kernel_predictor(curves, cfg: KernelConfig, query: Curve) -> Curve:
    """``sum_i K(||X^_i - query||^2 / h) X^_{i+1} / sum_i K(...)`` over pre-smoothed curves."""
    return fit_kernel(curves, cfg).predict(query)
