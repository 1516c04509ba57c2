import numpy as np
import pytest

from kkmfix.space import Element, Space


@pytest.fixture
def e2():
    return Space.euclidean(2)


@pytest.fixture
def vec(e2):
    def make(*coords):
        return Element(np.array(coords, dtype=float), e2)

    return make
