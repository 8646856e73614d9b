"""Shared fixtures. The smooth weight and the default sieve are expensive
enough (FFT grid, factor tables) that building them once per session
matters for the wall clock of the full run."""

import numpy as np
import pytest

from zmw import build_sieve, build_weight


@pytest.fixture(scope="session")
def weight():
    return build_weight()


@pytest.fixture(scope="session")
def sieve():
    # big enough for every Q_cutoff * h product used in the unit tests
    return build_sieve(2 * 10**5)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
