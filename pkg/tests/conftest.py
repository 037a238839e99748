import pytest

from laddersand.graphs import builtin_graph


@pytest.fixture(scope="session")
def path2():
    return builtin_graph("path2")


@pytest.fixture(scope="session")
def path3():
    return builtin_graph("path3")


@pytest.fixture(scope="session")
def cycle3():
    return builtin_graph("cycle3")


@pytest.fixture(scope="session")
def point():
    return builtin_graph("point")
