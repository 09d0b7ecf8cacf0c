import numpy as np
import pytest

from qubit_nlb.channel import QubitChannel
from qubit_nlb.linalg import PAULIS
from qubit_nlb.volume import classify_batch, sample_candidates

ACCEPTANCE_LINES: list[str] = []


def random_state(rng):
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng):
    q, r = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus_transfer(rng):
    """Transfer matrix of a random channel built from a random Stinespring isometry."""
    g = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    v, _ = np.linalg.qr(g)
    kraus = [v[:2], v[2:]]
    m = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            out = sum(k @ PAULIS[j] @ k.conj().T for k in kraus)
            m[i, j] = 0.5 * np.trace(PAULIS[i] @ out).real
    return m


def random_cp_canonical(rng, n, mode="full"):
    out = []
    while len(out) < n:
        t, lam = sample_candidates(rng, 4096, mode)
        ok = classify_batch(t, lam)["cp"]
        out.extend(QubitChannel(a, b) for a, b in zip(t[ok], lam[ok]))
    return out[:n]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
