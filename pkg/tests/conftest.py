import numpy as np
import pytest

from alqpt.harness import ExperimentConfig, run_experiment


def rand_state(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def rand_pool(rng, n, m):
    probes = np.stack([rand_state(rng, n) for _ in range(m)], axis=1)
    ideals = np.stack([rand_state(rng, n) for _ in range(m)], axis=1)
    return probes, ideals


def haar_unitary(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# The two statistical experiments are shared between the acceptance module
# and the statistical-invariant tests; each runs once per session.
N2_CONFIG = ExperimentConfig(
    n_qubits=2, vqc_depth=3, target_depth=3, budget=16, bootstrap=1,
    committee_size=6, repeats=30, base_seed=0,
)
N3_CONFIG = ExperimentConfig(
    n_qubits=3, vqc_depth=5, target_depth=5, budget=32, bootstrap=1,
    committee_size=6, repeats=30, base_seed=0, strategies=("GS", "RAND"),
)


@pytest.fixture(scope="session")
def n2_experiment():
    return run_experiment(N2_CONFIG)


@pytest.fixture(scope="session")
def n3_experiment():
    return run_experiment(N3_CONFIG)


# ---------------------------------------------------------------------------
# acceptance report: one PASS/FAIL line per criterion, echoed at session end
# ---------------------------------------------------------------------------

_ACCEPTANCE: list[str] = []


@pytest.fixture
def report():
    def emit(criterion: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
