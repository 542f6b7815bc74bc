import pytest

from covertower import SurfacePresentation, low_index_subgroups


@pytest.fixture(scope="session")
def pres2():
    return SurfacePresentation(2)


@pytest.fixture(scope="session")
def index_two_subgroups(pres2):
    return [s for s in low_index_subgroups(pres2, 2) if s.index == 2]
