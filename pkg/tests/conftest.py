import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ncaa import projections


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the numba kernels once so timed tests never pay JIT cost."""
    default = projections.active_backend()
    for backend in ("numpy", default):
        projections.set_backend(backend)
        projections.project_subsimplex(np.array([0.5, 0.7, -0.1]))
    projections.set_backend(default)
    yield


@pytest.fixture
def both_backends():
    """Yields a context manager-ish helper: run a callable under each backend."""
    default = projections.active_backend()

    def run(fn):
        results = {}
        for backend in ("numba", "numpy"):
            try:
                projections.set_backend(backend)
            except ImportError:
                continue
            results[backend] = fn()
        projections.set_backend(default)
        return results

    yield run
    projections.set_backend(default)
