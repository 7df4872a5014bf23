import numpy as np
import pytest

from embcomp.codecs.pca import pca_fit


def _projected_variances(x, mean, basis):
    proj = (x - mean) @ basis.T
    return proj.var(axis=0, ddof=1)


def test_eigenvalues_match_svd_oracle(rng):
    # independent oracle: singular values of the centered data matrix
    x = rng.standard_normal((300, 6)) @ rng.standard_normal((6, 6))
    mean, basis = pca_fit(x, 6)
    got = _projected_variances(x, mean, basis)
    centered = x - x.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    want = s**2 / (x.shape[0] - 1)
    assert np.allclose(got, want, atol=1e-9)


def test_isotropic_gaussian_eigenvalues_near_one(rng):
    x = rng.standard_normal((4000, 4))
    mean, basis = pca_fit(x, 4)
    variances = _projected_variances(x, mean, basis)
    assert np.abs(variances - 1.0).max() < 0.1


def test_variance_ordering_non_increasing(rng):
    x = rng.standard_normal((500, 8)) * np.arange(1, 9)
    mean, basis = pca_fit(x, 8)
    v = _projected_variances(x, mean, basis)
    assert (np.diff(v) <= 1e-9).all()


def test_basis_orthonormal(rng):
    x = rng.standard_normal((200, 10))
    _, basis = pca_fit(x, 7)
    gram = basis @ basis.T
    assert np.abs(gram - np.eye(7)).max() < 1e-6


def test_full_dim_projection_is_isometric(rng):
    x = rng.standard_normal((100, 5))
    mean, basis = pca_fit(x, 5)
    a, b = x[:50], x[50:]
    pa = (a - mean) @ basis.T
    pb = (b - mean) @ basis.T
    d_orig = np.linalg.norm(a - b, axis=1)
    d_proj = np.linalg.norm(pa - pb, axis=1)
    assert np.abs(d_orig - d_proj).max() < 1e-5


def test_sign_convention_largest_coordinate_positive(rng):
    x = rng.standard_normal((150, 6)) * np.array([5.0, 1, 1, 1, 1, 1])
    _, basis = pca_fit(x, 3)
    for row in basis:
        assert row[np.argmax(np.abs(row))] > 0


def test_rank_deficient_calibration_completes_basis(rng):
    thin = rng.standard_normal((40, 2))
    x = np.hstack([thin, thin @ rng.standard_normal((2, 3))])  # rank 2 in 5-d
    mean, basis = pca_fit(x, 5)
    gram = basis @ basis.T
    assert np.abs(gram - np.eye(5)).max() < 1e-8
    v = _projected_variances(x, mean, basis)
    assert (v[2:] < 1e-18).all()


def test_dominant_axis_recovered(rng):
    x = rng.standard_normal((2000, 3)) * np.array([10.0, 1.0, 0.1])
    _, basis = pca_fit(x, 1)
    assert abs(abs(basis[0, 0]) - 1.0) < 0.01


def test_errors():
    with pytest.raises(ValueError, match="at least 2"):
        pca_fit(np.zeros((1, 3)), 1)
    with pytest.raises(ValueError, match="out_dims"):
        pca_fit(np.zeros((5, 3)), 4)
