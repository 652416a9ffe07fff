import pytest

from xxzmagnon import acceptance


@pytest.fixture(scope="session")
def workspace():
    """Shared cache of spectra and long oracle series across acceptance tests."""
    return acceptance.Workspace()
