import math

import numpy as np
import pytest

from arlat.model import build_chain, build_qubit, build_two_time
from arlat.profiles import Cosine
from arlat.propagator import propagator_matrix
from arlat.steady import concatenate, solve_fixed_point

KAPPA6 = math.sqrt(7.0)


def solved(builder_output):
    chip, f, src = builder_output
    u = propagator_matrix(chip)
    ss = solve_fixed_point(u, f, src)
    return {"chip": chip, "f": f, "src": src, "u": u, "ss": ss, "sol": concatenate(chip, ss)}


@pytest.fixture(scope="session")
def chain6():
    """Six guides, beta=1, kappa=sqrt(7), tau=1, unit source on guide 1."""
    return solved(build_chain(6, 1.0, 1.0, KAPPA6))


@pytest.fixture(scope="session")
def modulated6():
    return solved(build_chain(6, 1.0, Cosine(1.0, 1.0, 2.0, 0.0), KAPPA6))


@pytest.fixture(scope="session")
def two_time5():
    return solved(build_two_time(5, 1.0, 1.0, 5.0, 5.0))


@pytest.fixture(scope="session")
def qubit5():
    return solved(build_qubit(5, 1.0, 1.0, 2.0, 3.0, 1.0, 1.0, 1.0))


@pytest.fixture(scope="session")
def qubit5_crossed():
    return solved(build_qubit(5, 1.0, 1.0, 2.0, 3.0, 1.0, 1.0, 1.0, crossed=True))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
