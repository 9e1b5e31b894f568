import pytest

from homestead.tests.utils import FakeContext, mug_on_counter


@pytest.fixture
def runtime_context():
    return FakeContext()


@pytest.fixture
def mug_scenario():
    return mug_on_counter()
