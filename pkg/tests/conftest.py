import pytest

from mobiusflow import build_exp_alpha, build_poly_alpha


@pytest.fixture(scope="session")
def exp_angle():
    return build_exp_alpha(4)


@pytest.fixture(scope="session")
def poly_angle():
    return build_poly_alpha(4, 6)
