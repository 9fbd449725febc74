import pytest

from vaxsel.panel import load_panel, load_schema

from importlib import resources


def packaged(name):
    return resources.files("vaxsel").joinpath("data").joinpath(name)


@pytest.fixture(scope="session")
def schema():
    return load_schema(packaged("schema.yaml"))


@pytest.fixture(scope="session")
def snapshot(schema):
    return load_panel(packaged("snapshot.csv"), schema)
