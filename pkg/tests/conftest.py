import numpy as np
import pytest

from fairpc.core import GramSet

C22 = np.cos(np.pi / 8)
S22 = np.sin(np.pi / 8)
# optimum of the rotated instance: 2 - (1 + cos^2 22.5deg) = sin^2 22.5deg
ROT_Z = S22 ** 2


def rotated():
    return GramSet.from_grams([[[2.0, 0.0], [0.0, 1.0]], [[1.5, 0.5], [0.5, 1.5]]])


def three_group():
    return GramSet.from_grams([np.diag([2.0, 1.0, 0.0]), np.diag([0.0, 2.0, 1.0]),
                               np.diag([1.0, 0.0, 2.0])])


def random_grams(rng, k, n, m=None):
    grams = []
    for _ in range(k):
        A = rng.standard_normal((m or rng.integers(n, 3 * n + 1), n))
        A = A * rng.uniform(0.3, 3.0, size=n)
        grams.append(A.T @ A)
    return GramSet.from_grams(grams)


def random_unit(rng, n, size=None):
    X = rng.standard_normal((n,) if size is None else (size, n))
    return X / np.linalg.norm(X, axis=-1, keepdims=True)


def simplex_point(rng, k):
    return rng.dirichlet(np.ones(k))


@pytest.fixture
def rot():
    return rotated()


@pytest.fixture
def three():
    return three_group()


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.VERDICTS):
        terminalreporter.write_line(mod.VERDICTS[n])
