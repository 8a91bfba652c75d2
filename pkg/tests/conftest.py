import numpy as np
import pytest

from risstat import StatisticalModel

ACCEPTANCE_LINES = []


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_psd(rng, n, rank=None):
    X = crandn(rng, n, rank or n)
    return X @ X.conj().T


def random_phase(rng, n):
    return np.exp(2j * np.pi * rng.random(n))


def random_model(rng, M, N, beta=1.0, zeta2=1.0, C_d=None, C_r=None):
    R_Tx = random_psd(rng, M)
    R_Tx *= M / np.trace(R_Tx).real
    R_RIS = random_psd(rng, N)
    R_RIS *= M / np.trace(R_RIS).real
    return StatisticalModel(
        C_d=random_psd(rng, M) if C_d is None else C_d,
        C_r=random_psd(rng, N) / N if C_r is None else C_r,
        R_RIS=R_RIS, R_Tx=R_Tx, beta=beta, C_n=zeta2 * np.eye(M))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def report_line():
    """Record a one-line acceptance verdict, printed in the terminal summary."""
    def record(label, ok, detail):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
