import warnings

import pytest

# the sandbox TBB is too old; numba falls back to OpenMP, which is fine
warnings.filterwarnings("ignore", message=".*TBB.*")


@pytest.fixture(scope="session", autouse=True)
def _warm_numba():
    """Touch nothing; numba kernels compile lazily and cache on disk."""
    yield
