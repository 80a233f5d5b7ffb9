import numpy as np
import pytest

from nntsreg import datasets
from nntsreg.formula import parse_formula

PERIWINKLE_FORMULA = "I(distance<=27)*(distance-27)"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def periwinkle():
    return datasets.load_periwinkle()


@pytest.fixture(scope="session")
def periwinkle_design(periwinkle):
    f = parse_formula(PERIWINKLE_FORMULA)
    return f, f.design(periwinkle)


@pytest.fixture(scope="session")
def wind():
    return datasets.load_wind()
