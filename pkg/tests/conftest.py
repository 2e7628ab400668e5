import pytest

from repcomp.harness import DesignCache


@pytest.fixture(scope="session")
def design_cache(tmp_path_factory):
    """Session-wide design store so sweeps reuse solved designs."""
    return DesignCache(str(tmp_path_factory.mktemp("designs")))
