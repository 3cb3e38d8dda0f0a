import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from routelogit import backend, datasets
from routelogit.rl import UtilitySpec


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # JIT compile once up front so per-test timing reflects the algorithms
    backend.warm_up()


@pytest.fixture(scope="session")
def toy_deadline():
    return datasets.toy_deadline()


@pytest.fixture(scope="session")
def toy_recharge():
    return datasets.toy_recharge()


@pytest.fixture(scope="session")
def grid_recharge():
    return datasets.grid_recharge()


@pytest.fixture(scope="session")
def sioux_falls():
    return datasets.sioux_falls()


@pytest.fixture(scope="session")
def u_minus2():
    return UtilitySpec(beta=[-2.0], mu=1.0)
