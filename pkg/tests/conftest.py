import pytest

from gamma_pm.profile import solve_profile


@pytest.fixture(scope="session")
def profile0():
    return solve_profile(0.0, 1.0)


@pytest.fixture(scope="session")
def profile_half():
    return solve_profile(0.5, 1.0, 256)
