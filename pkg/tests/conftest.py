import pytest
from hypothesis import settings

from exactg2.catalog import catalog_entry, load_catalog, reference_fixtures

settings.register_profile("exact", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("exact")


@pytest.fixture(scope="session")
def fixtures():
    return reference_fixtures()


@pytest.fixture(scope="session")
def catalog():
    return load_catalog()


@pytest.fixture(scope="session")
def algebra(catalog):
    def get(key):
        return catalog_entry(key, catalog).algebra
    return get
