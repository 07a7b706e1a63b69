import numpy as np
import pytest

from etlax.context import default_context


@pytest.fixture(scope="session")
def ctx2():
    return default_context(2)


@pytest.fixture(scope="session")
def ctx3():
    return default_context(3)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def rand_complex(rng, box=0.4):
    return complex(rng.uniform(-box, box) + 1j * rng.uniform(-box, box))


def sumzero_exp(rng, n):
    """Test function exp(2 pi i <lambda, v>) with a sum-zero direction v."""
    import cmath
    v = rng.normal(size=n)
    v = v - v.mean()

    def fn(lam):
        return cmath.exp(2j * cmath.pi * sum(a * b for a, b in zip(v, lam.coords)))
    return fn
