import os

import pytest

from tesgrid.glm import parse_scenario

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def load_fixture(name: str) -> str:
    with open(fixture_path(name), "r", encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture(scope="session")
def small_text() -> str:
    return load_fixture("feeder_small.glm")


@pytest.fixture()
def small_model(small_text):
    return parse_scenario(small_text)
