import pytest

from infforce.fixtures import corpus
from infforce.system import load_class


@pytest.fixture(scope="session")
def systems():
    return {name: load_class(doc) for name, doc in corpus().items()}


@pytest.fixture(scope="session")
def lo12(systems):
    return systems["lo12"]


@pytest.fixture(scope="session")
def lo3(systems):
    return systems["lo3"]
