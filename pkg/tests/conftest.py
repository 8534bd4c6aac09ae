import numpy as np
import pytest

from condlab import rng


def gaussian(seed, *path, shape):
    """Seeded N(0,1) array for tests; path keeps draws independent."""
    key = rng.substream(seed, *path)
    flat = rng.standard_normals(key, int(np.prod(shape)))
    return flat.reshape(shape)


@pytest.fixture
def gauss():
    return gaussian
