import numpy as np
import pytest

from lrqd import QMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def sigma_matrix(s, m, n):
    """Real diagonal m x n quaternion matrix carrying the singular values."""
    p = np.zeros((4, m, n))
    k = len(s)
    p[0, :k, :k] = np.diag(s)
    return QMatrix(p)


def unit_scale(d):
    """Rescale so each real component has unit RMS."""
    m, n = d.shape
    return d / (d.norm() / np.sqrt(4 * m * n))


def synthetic_rank2_image(m, n):
    """RGB image ``sum_t a_t b_t^T c_t`` with two real profiles and two colors.

    As a pure quaternion matrix it equals ``[a1 q1, a2 q2] @ [b1; b2]^T`` with
    pure quaternion colors ``q_t``, so its quaternion rank is at most 2.
    """
    y = np.linspace(0.0, 1.0, m)
    x = np.linspace(0.0, 1.0, n)
    profiles = [
        (0.5 + 0.5 * np.sin(3 * y), 0.5 + 0.5 * np.cos(2 * x), np.array([0.6, 0.3, 0.1])),
        (y ** 2, 0.5 + 0.5 * np.sin(5 * x + 1), np.array([0.1, 0.4, 0.5])),
    ]
    img = sum(np.einsum("i,j,c->ijc", a, b, c) for a, b, c in profiles)
    return img / img.max()


_acceptance_lines = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the end-of-session acceptance table."""
    def emit(name, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {name:<22} {detail}"
        _acceptance_lines.append(line)
        print(line)
        return ok
    return emit


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
