import random

import pytest
from hypothesis import strategies as st

from lbpgrid.grid import BoundaryConfig


def one_run(N: int, rng: random.Random) -> BoundaryConfig:
    L = 4 * N + 4
    return BoundaryConfig.arc(N, rng.randrange(L), rng.randint(1, L - 1))


@st.composite
def one_run_boundaries(draw, sizes=(1, 2, 3, 4)):
    N = draw(st.sampled_from(sizes))
    L = 4 * N + 4
    return BoundaryConfig.arc(N, draw(st.integers(0, L - 1)), draw(st.integers(1, L - 1)))


@st.composite
def any_boundaries(draw, sizes=(1, 2, 3)):
    N = draw(st.sampled_from(sizes))
    signs = draw(st.lists(st.sampled_from((-1, 1)), min_size=4 * N + 4, max_size=4 * N + 4))
    return BoundaryConfig(N, tuple(signs))


@pytest.fixture
def rng():
    return random.Random(20240611)
