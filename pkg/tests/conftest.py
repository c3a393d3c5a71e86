import numpy as np
import pytest

from nstfb.problems import gen_gaussian_matrix, gen_sparse_signal


def gaussian_system(M, N, s, seed, ensemble="gaussian"):
    a_seed, x_seed = np.random.SeedSequence(seed).spawn(2)
    A = gen_gaussian_matrix(M, N, a_seed)
    x = gen_sparse_signal(N, s, ensemble, x_seed)
    return A, x, A @ x


def parseval_frame(M, N, seed):
    """``M x N`` matrix with orthonormal rows (first rows of a random orthogonal matrix)."""
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((N, N)))
    return Q[:M]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def simplex_frame(N, seed=None):
    """``(N-1) x N`` Parseval frame of the regular simplex: Gram ``I - J/N``.

    Its restricted constants are known in closed form,
    ``delta_s = gamma_s = s / N``.  ``seed`` applies a random rotation,
    which changes the matrix but not its Gram.
    """
    basis = np.column_stack([np.ones(N), np.random.default_rng(0).standard_normal((N, N - 1))])
    A = np.linalg.qr(basis)[0][:, 1:].T
    if seed is not None:
        R = np.linalg.qr(np.random.default_rng(seed).standard_normal((N - 1, N - 1)))[0]
        A = R @ A
    return A


ACCEPTANCE_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_LINES] = []


@pytest.fixture
def acceptance_line(request):
    """Record one PASS/FAIL line for the terminal summary and print it."""

    def record(line):
        print(line)
        request.config.stash[ACCEPTANCE_LINES].append(line)

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
