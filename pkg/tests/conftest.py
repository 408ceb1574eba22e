import numpy as np
import pytest

from minmarkov.mininfo import MinInfoSpec, binomial_marginal, construct, inar1_dependence, inar2_dependence
from minmarkov.statespace import StateSpace

BINOM = binomial_marginal(5, 0.4)


@pytest.fixture(scope="session")
def inar1():
    base = StateSpace.integers(5)
    return construct(MinInfoSpec(base, inar1_dependence(5, -1.0), BINOM))


@pytest.fixture(scope="session")
def inar2():
    base = StateSpace.integers(5)
    return construct(MinInfoSpec(base, inar2_dependence(5, (0.6, -0.3)), BINOM, order=2))


@pytest.fixture(scope="session")
def inar2_flipped():
    base = StateSpace.integers(5)
    return construct(MinInfoSpec(base, inar2_dependence(5, (0.6, 0.3)), BINOM, order=2))


def random_marginal(rng, m):
    r = rng.dirichlet(np.ones(m)) + 0.02
    return r / r.sum()
