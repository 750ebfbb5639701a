import pytest

from chainvoice.bootstrap import bootstrap_world
from chainvoice.flow import prepare_world

SEED = "test-seed"


@pytest.fixture
def world():
    return bootstrap_world(SEED)


@pytest.fixture
def prepared(world):
    """Bootstrapped world with the supply agreement countersigned, the read
    grant in place, and both finance contracts deployed."""
    addrs = prepare_world(world)
    return world, addrs
