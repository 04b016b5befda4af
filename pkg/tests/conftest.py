import os
from pathlib import Path

import numpy as np
import pytest

import hamls

REPO_CACHE = Path(__file__).resolve().parent.parent / "cache"
os.environ.setdefault("AMLS_CACHE_DIR", str(REPO_CACHE))


@pytest.fixture(scope="session")
def bench200() -> hamls.DiscreteProblem:
    return hamls.build_problem(200)


@pytest.fixture(scope="session")
def reference20() -> np.ndarray:
    return hamls.compute_reference(5000, 20)


@pytest.fixture(scope="session")
def discrete200(bench200) -> np.ndarray:
    return hamls.discrete_spectrum(bench200, 20)


def random_pencil(rng, n, spd_k=False):
    """Random symmetric K (optionally SPD) and SPD M of size n."""
    A = rng.standard_normal((n, n))
    K = A @ A.T + n * np.eye(n) if spd_k else 0.5 * (A + A.T)
    B = rng.standard_normal((n, n))
    M = B @ B.T + n * np.eye(n)
    return K, M
