import numpy as np
import pytest

from newtonlab.maps import build_map, build_newton_map
from newtonlab.window import Window


@pytest.fixture(scope="session")
def N2():
    return build_newton_map("z^2-1")


@pytest.fixture(scope="session")
def N3():
    return build_newton_map("z^3-1")


@pytest.fixture(scope="session")
def half_plus_inverse():
    return build_map("z/2+1/z")


@pytest.fixture(scope="session")
def square2():
    return Window.square(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_RENDERS = {}


@pytest.fixture(scope="session")
def render():
    """Cached Newton-basin renders keyed by (function, half-width, resolution)."""
    from newtonlab.dynamics import render_basins

    def get(text, half, resolution):
        key = (text, half, resolution)
        if key not in _RENDERS:
            w = Window.square(half)
            N = build_newton_map(text, w)
            _RENDERS[key] = render_basins(N, N.roots_in(w), w, resolution)
        return _RENDERS[key]

    return get
