import numpy as np
import pytest

from fracks.grid import Field, TorusGrid


@pytest.fixture
def grid64():
    return TorusGrid(64)


@pytest.fixture
def grid128():
    return TorusGrid(128)


@pytest.fixture
def grid256():
    return TorusGrid(256)


def random_field(grid: TorusGrid, seed: int, kmax: int | None = None) -> Field:
    """Band-limited random field; products stay alias-free for kmax <= n/4."""
    kmax = kmax or grid.n // 6
    rng = np.random.default_rng(seed)
    vals = np.zeros(grid.n)
    for k in range(1, kmax + 1):
        a, b = rng.normal(size=2) / (1.0 + k)
        vals += a * np.cos(k * grid.x) + b * np.sin(k * grid.x)
    return Field(grid, vals)
