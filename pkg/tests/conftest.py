import pytest

from dynarag.fixtures import build_world_runtime


@pytest.fixture(scope="session")
def world_runtime():
    """Immutable demo-world runtime shared by the end-to-end tests."""
    return build_world_runtime()
