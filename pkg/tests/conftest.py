"""Shared metric fixtures.

Session scope keeps one model object per configuration so the global
frame cache is reused across test files.
"""

import pytest

from finslerkit.library import (
    FunkSpec,
    SpaceFormSpec,
    euclidean,
    funk,
    klein,
    minkowski_randers,
    perturbed_randers,
)


@pytest.fixture(scope="session")
def euclid2():
    return euclidean(2)


@pytest.fixture(scope="session")
def euclid3():
    return euclidean(3)


@pytest.fixture(scope="session")
def klein2():
    return klein(SpaceFormSpec(n=2, k=-1))


@pytest.fixture(scope="session")
def klein3():
    return klein(SpaceFormSpec(n=3, k=-1))


@pytest.fixture(scope="session")
def funk2():
    # generalized Funk with drift, both signs plus
    return funk(FunkSpec(n=2, a=(0.5, 0.0)))


@pytest.fixture(scope="session")
def funk2_plain():
    return funk(FunkSpec(n=2))


@pytest.fixture(scope="session")
def funk2_minus():
    return funk(FunkSpec(n=2, sign1=-1, sign2=-1))


@pytest.fixture(scope="session")
def funk2_mixed():
    return funk(FunkSpec(n=2, sign1=1, sign2=-1, a=(0.3, 0.1)))


@pytest.fixture(scope="session")
def funk3():
    return funk(FunkSpec(n=3, a=(0.5, 0.0, 0.0)))


@pytest.fixture(scope="session")
def funk3_plain():
    return funk(FunkSpec(n=3))


@pytest.fixture(scope="session")
def mink2():
    return minkowski_randers(2, (0.5, 0.0))


@pytest.fixture(scope="session")
def mink3():
    return minkowski_randers(3, (0.3, 0.1, 0.2))


@pytest.fixture(scope="session")
def perturbed2():
    return perturbed_randers(2, seed=1)


@pytest.fixture(scope="session")
def perturbed3():
    return perturbed_randers(3, seed=2)
