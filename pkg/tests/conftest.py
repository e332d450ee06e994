import numpy as np
import pytest

# Independent dense helpers: plain np.kron, site i at Kronecker slot n-1-i,
# local basis (down, up).
SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, 1j], [-1j, 0]], dtype=complex) / 2
SZ = np.diag([-0.5, 0.5]).astype(complex)
SP = np.array([[0, 0], [1, 0]], dtype=complex)
SM = SP.T.copy()


def embed(op, site, n):
    out = np.eye(1, dtype=complex)
    for k in range(n - 1, -1, -1):
        out = np.kron(out, op if k == site else np.eye(2))
    return out


def collective(n, weights=None):
    w = np.ones((3, n)) if weights is None else np.asarray(weights)
    return [sum(w[a, i] * embed(op, i, n) for i in range(n)) for a, op in enumerate((SX, SY, SZ))]


def expect(op, vec):
    return np.vdot(vec, op @ vec)


def random_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(20211)


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split("criterion ")[1]):
            terminalreporter.write_line(line)
