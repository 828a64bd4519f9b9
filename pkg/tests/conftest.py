import shutil

import pytest

import cise
from cise.solver import DomainBounds, FiniteBackend, SmtBackend

needs_smt = pytest.mark.skipif(shutil.which("z3") is None, reason="z3 not installed")


def load(name):
    return cise.parse_file(cise.corpus_path(name))


@pytest.fixture
def finite():
    return FiniteBackend()


@pytest.fixture
def small():
    return FiniteBackend(DomainBounds.of(int_range=(-2, 2)))


@pytest.fixture
def smt():
    return SmtBackend()


@pytest.fixture
def bank_v1():
    return load("bank_v1")


@pytest.fixture
def bank_v2():
    return load("bank_v2")
