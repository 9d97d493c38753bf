import numpy as np
import pytest

from abflux import ApertureGeometry


@pytest.fixture(scope="session")
def jonsson():
    return ApertureGeometry.jonsson()


def symmetric_grid(half_width, points_per_side):
    """Screen grid that is exactly symmetric about zero, so parity
    properties hold bitwise rather than to linspace round-off."""
    half = np.linspace(0.0, half_width, points_per_side)
    return np.concatenate([-half[::-1][:-1], half])
