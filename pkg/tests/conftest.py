import numpy as np
import pytest

from tramsim.dynamics import DRY, WET, TramParams
from tramsim.track import TrackMap


@pytest.fixture
def t3() -> TramParams:
    """Default parameter set at the 17 t test weight."""
    return TramParams()


@pytest.fixture
def dry():
    return DRY


@pytest.fixture
def wet():
    return WET


@pytest.fixture
def track5() -> TrackMap:
    """Hand-built 5-vertex city-scale track, ~1.5 km, varied slopes."""
    return TrackMap(
        [
            (49.8300, 18.2800, 0.0),
            (49.8330, 18.2810, 0.01),
            (49.8360, 18.2850, -0.02),
            (49.8390, 18.2860, 0.0),
            (49.8420, 18.2900, 0.005),
        ]
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)
