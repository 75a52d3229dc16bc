import pytest
from hypothesis import settings

from bayesgi.core_model import GameParams

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def base():
    """P = 1, N0 = 0.01, K = 2, no entry cost."""
    return GameParams(1.0, 0.01, 2, 0.0)


@pytest.fixture
def costly():
    """Same channel with k = 2, so kP = 2."""
    return GameParams(1.0, 0.01, 2, 2.0)
