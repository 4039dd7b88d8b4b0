import numpy as np
import pytest

from distopt.costs import catalog, network_cost
from distopt.graph import preset_graph
from distopt.scenarios import AnalysisOptions, Scenario
from distopt.schedulers import Continuous


@pytest.fixture
def k2():
    return preset_graph("k2")


@pytest.fixture
def quad_pair():
    # (x - 4)^2 and (x + 2)^2: optimum of the sum at x = 1
    return (catalog("f2"), catalog("f10"))


@pytest.fixture
def quad_pair_nc(quad_pair):
    return network_cost(quad_pair)


@pytest.fixture
def ten_suite():
    return tuple(catalog(f"f{i}") for i in range(1, 11))


def make_scenario(costs, graph=None, schedule=None, scheme=None, alpha=1.0, beta=1.0,
                  t_final=10.0, h=1e-3, stride=10, seed=1, x0=None, v0=None,
                  analysis=None, name="test"):
    n = len(costs)
    d = costs[0].dim
    if x0 is None:
        x0 = np.random.default_rng(seed).uniform(-5.0, 5.0, size=(n, d))
    if v0 is None:
        v0 = np.zeros((n, d))
    return Scenario(
        name=name,
        costs=tuple(costs),
        alpha=alpha,
        beta=beta,
        scheme=scheme if scheme is not None else Continuous(),
        t_final=t_final,
        h=h,
        stride=stride,
        seed=seed,
        x0=np.asarray(x0, dtype=float).reshape(n, d),
        v0=np.asarray(v0, dtype=float).reshape(n, d),
        graph=graph,
        schedule=schedule,
        analysis=analysis if analysis is not None else AnalysisOptions(),
    )
