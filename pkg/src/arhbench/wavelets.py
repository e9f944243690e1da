"""Orthonormal periodized discrete wavelet transform (pyramid algorithm)."""

from __future__ import annotations

import enum

import numpy as np

from .errors import NonDyadicLengthError

_S3 = np.sqrt(3.0)


class WaveletFamily(str, enum.Enum):
    HAAR = "haar"
    D4 = "db4"


_LOWPASS = {
    WaveletFamily.HAAR: np.array([1.0, 1.0]) / np.sqrt(2.0),
    WaveletFamily.D4: np.array([1 + _S3, 3 + _S3, 3 - _S3, 1 - _S3]) / (4 * np.sqrt(2.0)),
}


def filters(family) -> tuple[np.ndarray, np.ndarray]:
    """Analysis low-pass ``h`` and high-pass ``g[m] = (-1)^m h[L-1-m]``."""
    h = _LOWPASS[WaveletFamily(family)]
    g = h[::-1] * (-1.0) ** np.arange(h.size)
    return h, g


def dyadic_level(length: int) -> int:
    J = int(length).bit_length() - 1
    if length < 1 or 2**J != length:
        raise NonDyadicLengthError(f"signal length {length} is not a power of two")
    return J


def _index(N: int, L: int) -> np.ndarray:
    # idx[k, m] = (2k + m) mod N
    return (2 * np.arange(N // 2)[:, None] + np.arange(L)[None, :]) % N


def _analysis(x, h, g):
    idx = _index(x.size, h.size)
    seg = x[idx]
    return seg @ h, seg @ g


def _synthesis(a, d, h, g):
    N = 2 * a.size
    idx = _index(N, h.size)
    out = np.zeros(N)
    np.add.at(out, idx, a[:, None] * h[None, :] + d[:, None] * g[None, :])
    return out


def dwt(signal, family=WaveletFamily.HAAR, j0: int = 0) -> list[np.ndarray]:
    """Decompose down to ``2**j0`` scaling coefficients.

    Returns
    -------
    list of ndarray
        ``[a_{j0}, d_{j0}, d_{j0+1}, ..., d_{J-1}]`` where ``d_j`` has
        ``2**j`` entries.
    """
    x = np.asarray(signal, dtype=float)
    J = dyadic_level(x.size)
    if not 0 <= j0 <= J:
        raise ValueError(f"j0 must lie in [0, {J}], got {j0}")
    h, g = filters(family)
    details = []
    a = x
    for _ in range(J - j0):
        a, d = _analysis(a, h, g)
        details.append(d)
    return [a] + details[::-1]


def idwt(coeffs, family=WaveletFamily.HAAR) -> np.ndarray:
    h, g = filters(family)
    a = np.asarray(coeffs[0], dtype=float)
    dyadic_level(a.size)
    for d in coeffs[1:]:
        d = np.asarray(d, dtype=float)
        if d.size != a.size:
            raise NonDyadicLengthError("detail level length does not match the scaling level")
        a = _synthesis(a, d, h, g)
    return a
