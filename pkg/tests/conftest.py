import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dmkr.params import MapParams
from dmkr.quantum import HilbertSpace


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def params_chaotic():
    return MapParams(K=5.4, gamma=0.2, hbar_eff=0.2)


@pytest.fixture
def small_space():
    return HilbertSpace(N=64, hbar_eff=0.2)
