import numpy as np
import pytest

from sunsebdf.numerics.problem import OdeProblem, model_problem
from sunsebdf.stability import threshold_roots


@pytest.fixture(scope="session")
def roots():
    return threshold_roots()


@pytest.fixture
def model():
    return model_problem()


def linear_problem(lam: float, horizon: float = 1.0) -> OdeProblem:
    """v' = lam·v, v(0) = 1."""
    return OdeProblem(
        rhs=lambda t, v: lam * v,
        v0=np.array([1.0]),
        horizon=horizon,
        jacobian=lambda t, v: np.array([[lam]]),
        lipschitz=abs(lam) or None,
        exact=lambda t: np.array([np.exp(lam * t)]),
        name="linear",
    )
