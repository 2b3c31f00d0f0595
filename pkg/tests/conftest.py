import numpy as np
import pytest

from earthvl.synth import cross_road_spec, generate_mask


@pytest.fixture
def cross_mask():
    """Two width-3 roads crossing at the center of a 64x64 grid."""
    mask, _ = generate_mask(cross_road_spec(), seed=0)
    return mask


@pytest.fixture
def empty_mask():
    from earthvl.raster import Mask

    return Mask(grid=np.zeros((64, 64), dtype=np.uint8))
