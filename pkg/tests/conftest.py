"""共通フィクスチャ"""

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from src.wishart_tw.run_logger import get_logger


@pytest.fixture(autouse=True)
def _quiet_logger():
    logger = get_logger()
    logger.set_level("error")
    logger.clear()
    yield
    logger.clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def panel_quadrature():
    """[a, b] を幅 width のパネルに分けた Gauss–Legendre 節点と重み"""

    def make(a: float, b: float, width: float = 2.0, order: int = 32):
        t, w = leggauss(order)
        edges = np.arange(a, b + 0.5 * width, width)
        nodes, weights = [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            nodes.append(lo + 0.5 * (hi - lo) * (t + 1.0))
            weights.append(0.5 * (hi - lo) * w)
        return np.concatenate(nodes), np.concatenate(weights)

    return make
