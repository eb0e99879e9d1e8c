import pytest

from stackcost import kernels


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # JIT-compile the hot kernels once so individual tests time only the math.
    kernels.warm_up()
