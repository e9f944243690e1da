"""Shared toy instances for the oracle comparisons."""

import numpy as np

from arhbench.componentwise import DiagEstimate


def toy_instances(count=40, seed=2024):
    """Random toy series with M <= 3, n <= 6 and a well separated spectrum."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        M = int(rng.integers(1, 4))
        n = int(rng.integers(M + 2, 7))
        X = rng.normal(size=(n, M))
        vals = np.linalg.eigvalsh(X.T @ X / n)
        if vals.min() > 1e-2 and (M == 1 or np.diff(vals).min() > 1e-2):
            out.append(X)
    return out


TOYS = toy_instances()


def operator(model):
    """Coefficient-space operator ``Phi R Phi^T`` of a fitted componentwise model."""
    Phi = model.eigvecs.eigenvectors[:, : model.k_n]
    R = np.diag(model.rho_hat) if isinstance(model, DiagEstimate) else model.rho_matrix
    return Phi @ R @ Phi.T
