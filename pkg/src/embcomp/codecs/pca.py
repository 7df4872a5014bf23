"""PCA fit via eigendecomposition of the sample covariance (divisor n-1)."""

import numpy as np


def pca_fit(calibration: np.ndarray, out_dims: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(mean, basis)`` with ``basis`` of shape (out_dims, dim).

    Rows of ``basis`` are orthonormal eigenvectors of the sample covariance
    in descending eigenvalue order. Each row is sign-normalized so its
    largest-magnitude coordinate is positive. When the calibration sample is
    rank-deficient, eigh still yields a full orthonormal set, so zero-variance
    directions complete the basis.
    """
    x = np.asarray(calibration, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("calibration must be 2-D")
    n, dim = x.shape
    if n < 2:
        raise ValueError("PCA needs at least 2 calibration vectors")
    if not 1 <= out_dims <= dim:
        raise ValueError(f"out_dims must be in [1, {dim}], got {out_dims}")

    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)  # ascending
    order = np.argsort(eigvals)[::-1]
    basis = eigvecs[:, order].T[:out_dims].copy()

    for row in basis:
        j = int(np.argmax(np.abs(row)))
        if row[j] < 0:
            row *= -1.0
    return mean, basis
