import numpy as np
import pytest

from volqso import SkewMatrix, validate


@pytest.fixture(scope="session")
def all_half() -> SkewMatrix:
    """Canonical cyclic matrix with every parameter 0.5."""
    return SkewMatrix((
        (0.0, 0.5, 0.5, -0.5),
        (-0.5, 0.0, 0.5, 0.5),
        (-0.5, -0.5, 0.0, 0.5),
        (0.5, -0.5, -0.5, 0.0),
    ))


@pytest.fixture(scope="session")
def dominant_row_matrix() -> SkewMatrix:
    """Class-1 reference: first row strictly positive off the diagonal."""
    return SkewMatrix((
        (0.0, 0.8, 0.8, 0.8),
        (-0.8, 0.0, 0.3, -0.2),
        (-0.8, -0.3, 0.0, 0.4),
        (-0.8, 0.2, -0.4, 0.0),
    ))


@pytest.fixture(scope="session")
def generic_start4():
    return validate((0.4, 0.3, 0.2, 0.1))


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
