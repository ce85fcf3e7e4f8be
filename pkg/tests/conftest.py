import pytest

from copolymer import ReturnLaw, diblock, parse_sequence


@pytest.fixture(scope="session")
def db4():
    return parse_sequence("++--")


@pytest.fixture(scope="session")
def law2():
    return ReturnLaw(2)


@pytest.fixture(scope="session")
def db8():
    return diblock(4)


@pytest.fixture(scope="session")
def law4():
    return ReturnLaw(4)
