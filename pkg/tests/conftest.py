import numpy as np
import pytest

from netid.model import NetworkSystem

EXAMPLE_A = np.array([[1.0, 1, 1, 0],
                      [0, 1, 1, 0],
                      [1, 0, 0, 0],
                      [0, 1, 1, 1]])

CLOSE_A = np.array([[-3.0, 1, 0], [0, -3, 0], [1, 0, -3]])
CLOSE_B = np.array([[-2.0, 0, 0.1], [0, 0, 0], [0.833, 0, -2]])


@pytest.fixture
def example_system():
    return NetworkSystem(EXAMPLE_A, [[1.0, 0, 0, 0]])


@pytest.fixture
def close_system():
    return NetworkSystem(CLOSE_A, [[1.0, 0, 0]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hurwitz(rng, n, margin=0.5):
    """Random dense matrix shifted so every eigenvalue has real part <= -margin."""
    M = rng.standard_normal((n, n))
    shift = np.max(np.linalg.eigvals(M).real) + margin
    return M - shift * np.eye(n)


def gauss_nullspace(M, tol=1e-10):
    """Nullspace basis by reduced row echelon form (independent of any SVD)."""
    R = np.array(M, dtype=float)
    rows, cols = R.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = r + np.argmax(np.abs(R[r:, c]))
        if abs(R[p, c]) <= tol:
            continue
        R[[r, p]] = R[[p, r]]
        R[r] /= R[r, c]
        for i in range(rows):
            if i != r:
                R[i] -= R[i, c] * R[r]
        pivots.append(c)
        r += 1
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols)
        v[f] = 1.0
        for i, pc in enumerate(pivots):
            v[pc] = -R[i, f]
        basis.append(v)
    return np.array(basis).T if basis else np.zeros((cols, 0))


def principal_angle_max(U, V):
    """Largest principal angle between the column spans of U and V."""
    Qu = np.linalg.qr(U)[0]
    Qv = np.linalg.qr(V)[0]
    if Qu.shape[1] != Qv.shape[1]:
        return np.pi / 2
    # sine of the largest angle, accurate for tiny angles unlike arccos
    sin = np.linalg.norm(Qv - Qu @ (Qu.T @ Qv), 2)
    return float(np.arcsin(min(sin, 1.0)))


ACCEPTANCE_LINES = []


def record_acceptance(number, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
