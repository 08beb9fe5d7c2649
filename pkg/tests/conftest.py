import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

import imin
from util import make_toy


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so timed tests see steady state."""
    g = imin.from_edges(3, [(0, 1, 1.0), (1, 2, 0.5)])
    s = imin.sample_live_edge(g, 0, 1, 0)
    imin.build_domtree(s)
    imin.mcs_spread(g, 0, r=4, master_seed=1)
    imin.decrease_es(g, 0, 4, 1)


@pytest.fixture
def toy():
    return make_toy()


@pytest.fixture
def toy_path():
    return str(Path(__file__).parent / "data" / "toy.txt")
