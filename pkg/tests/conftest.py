import numpy as np
import pytest
import scipy.fft as fft

from strato.grid import GridSpec, ScalarField


@pytest.fixture(scope="session")
def grid64():
    return GridSpec(n=64, half_length=8.0)


@pytest.fixture(scope="session")
def grid128():
    return GridSpec(n=128, half_length=8.0)


@pytest.fixture(scope="session")
def grid256():
    return GridSpec(n=256, half_length=8.0)


def random_field(grid, seed, band=None):
    """Frozen random field; band (in |k| units) low-pass projects it."""
    rng = np.random.default_rng(seed)
    values = rng.standard_normal((grid.n, grid.n))
    if band is None:
        return ScalarField(grid, values)
    spec = fft.fft2(values) * (grid.kmag <= band)
    return ScalarField.from_spectrum(grid, spec)


@pytest.fixture(scope="session")
def band_limited_pair(grid128):
    from strato.littlewood_paley import DyadicPartition

    part = DyadicPartition(grid128)
    band = 2.0 ** (part.q_max - 2)
    u = random_field(grid128, 11, band=band)
    v = random_field(grid128, 12, band=band)
    return u, v
