import random
from fractions import Fraction

import pytest

from arrangement import instantiate, builtin_octic
from finite_field import FieldSpec
from multipoly import polynomial_ring


@pytest.fixture
def family():
    return builtin_octic()


@pytest.fixture
def special_planes(family):
    return instantiate(family, 0)


@pytest.fixture
def generic_planes(family):
    return instantiate(family, Fraction(5))


@pytest.fixture
def f7():
    return FieldSpec(7)


@pytest.fixture
def f49():
    return FieldSpec(7, 2)


@pytest.fixture
def xy():
    return polynomial_ring("x y")


@pytest.fixture
def rng():
    return random.Random(20240617)


@pytest.fixture
def cache_path(tmp_path):
    return tmp_path / "counts.tsv"
