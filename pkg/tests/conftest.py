"""
Pytest configuration and shared fixtures
"""

import pytest
import numpy as np
from unittest.mock import MagicMock

from dlshaped_vrpsd.core.builtin_instances import load_builtin
from dlshaped_vrpsd.core.demand import make_bernoulli, make_deterministic, make_discrete, make_poisson
from dlshaped_vrpsd.core.instance import Instance, normalize_metric


@pytest.fixture
def non_monotone():
    """Three Poisson customers whose OR recourse drops when customer 2 is inserted"""
    return load_builtin("non-monotone")


@pytest.fixture
def vanishing():
    """Four Bernoulli customers on a square where every S-cut is trivial"""
    return load_builtin("vanishing-s-cuts")


@pytest.fixture
def overestimation():
    """Eight Bernoulli(0.9) customers on a star where DTD P-cuts overestimate"""
    return load_builtin("overestimation")


@pytest.fixture
def single_customer():
    """One customer with deterministic demand equal to capacity"""
    return load_builtin("single-customer")


def build_random_instance(
    seed: int, n: int = 5, family: str = "poisson", capacity: int = 10, fleet=None, iid: bool = False
) -> Instance:
    """Euclidean instance with seeded coordinates and demands.

    Bernoulli customers always share one success probability; iid extends that to Poisson rates.
    """
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, 10, size=(n + 1, 2))
    distance = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=2))
    if family == "poisson":
        rates = [float(rng.integers(1, 5)) for _ in range(n)]
        if iid:
            rates = [rates[0]] * n
        demands = tuple(make_poisson(rate) for rate in rates)
    elif family == "bernoulli":
        p = round(float(rng.uniform(0.3, 0.9)), 2)
        demands = tuple(make_bernoulli(p) for _ in range(n))
    elif family == "discrete":
        demands = []
        for _ in range(n):
            low = int(rng.integers(0, 3))
            mass = rng.uniform(0.2, 1.0, size=3)
            demands.append(make_discrete([low, low + 1, low + 3], mass / mass.sum()))
        demands = tuple(demands)
    else:
        demands = tuple(make_deterministic(int(rng.integers(1, 5))) for _ in range(n))
    total = sum(d.mean for d in demands)
    if fleet is None:
        m_min = max(1, int(np.ceil(total / capacity - 1e-9)))
        fleet = tuple(range(m_min, n + 1))
    instance = Instance(
        n=n,
        distance=distance,
        demands=demands,
        capacity=capacity,
        load_factor=1.0,
        fleet=fleet,
        name=f"random-{family}-{seed}",
    )
    return normalize_metric(instance)


@pytest.fixture
def random_instance():
    """Factory for seeded random Euclidean instances"""
    return build_random_instance


@pytest.fixture
def sample_request():
    """Create a sample request object"""
    request = MagicMock()
    request.arguments = {}
    return request
