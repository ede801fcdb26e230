import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tdb_spde import build_case, make_config

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def dirichlet_problem():
    return build_case(make_config("linadv-dirichlet", n=33, d=2, q=3, r=[3], t_final=1.0))


@pytest.fixture(scope="session")
def robin_problem():
    return build_case(make_config("linadv-robin", n=33, d=2, q=3, r=[3], t_final=1.0))


@pytest.fixture(scope="session")
def neumann_problem():
    return build_case(make_config("linadv-neumann", n=33, d=2, q=3, r=[3], t_final=1.0))


@pytest.fixture(scope="session")
def burgers_problem():
    return build_case(make_config("burgers-dirichlet", n=33, d=2, q=3, r=[3], t_final=1.0))


@pytest.fixture(scope="session")
def conv2d_problem():
    return build_case(make_config("conv2d-linear", n1=9, n2=9, d=2, q=2, r=[3], t_final=2.0))
