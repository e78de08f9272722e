import numpy as np
import pytest

from pagesum.embedding import EmbeddingConfig, EmbeddingTable
from pagesum.network import NetworkConfig, init_params


@pytest.fixture(scope="session")
def small_table():
    return EmbeddingTable(EmbeddingConfig(dim=8, bucket_count=1000, seed=0))


@pytest.fixture
def small_config():
    return NetworkConfig(page_len=6, embed_dim=8, hidden_size=5, epochs=3, seed=0)


@pytest.fixture
def small_params(small_config):
    return init_params(small_config)


def unit_rows(rng, n, dim):
    rows = rng.normal(size=(n, dim))
    return rows / np.linalg.norm(rows, axis=1, keepdims=True)
