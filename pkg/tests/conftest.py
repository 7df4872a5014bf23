import numpy as np
import pytest

from embcomp.store import EmbeddingMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_matrix(values, ids=None) -> EmbeddingMatrix:
    values = np.asarray(values, dtype=np.float32)
    if values.ndim == 1:
        values = values[:, None]
    if ids is None:
        ids = [f"doc{i}" for i in range(values.shape[0])]
    return EmbeddingMatrix(list(ids), values)
