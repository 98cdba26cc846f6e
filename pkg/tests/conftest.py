import numpy as np
import pytest

from vucq.mdp import Mdp

ACCEPTANCE_LINES = []


def random_mdp(rng, S, A, H, sparse=False):
    P = rng.random((S, A, S)) + 1e-3
    if sparse:
        P *= rng.random((S, A, S)) < 0.5
        P[..., 0] += 1e-3
    P /= P.sum(axis=-1, keepdims=True)
    return Mdp(S, A, H, P, rng.random((S, A)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
