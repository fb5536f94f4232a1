import numpy as np
import pytest

from lfdepth import DispRange, LightField
from lfdepth.synth import occluded_scene_spec, render


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_lf(rng, U=3, V=3, H=8, W=8, C=1):
    return LightField.from_array(rng.random((U, V, H, W, C), dtype=np.float32))


@pytest.fixture
def small_lf(rng):
    return random_lf(rng)


@pytest.fixture
def occluded_scene():
    """Textured square (d=2) over textured background (d=0), 9x9 views."""
    spec = occluded_scene_spec(H=64, W=64, seed=0)
    return render(spec, seed=0) + (spec,)


@pytest.fixture
def drange():
    return DispRange(-4, 4)
