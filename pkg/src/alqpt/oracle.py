"""The unknown process: seeded random circuits and a counting query interface."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    MAX_QUBITS,
    Circuit,
    Gate,
    InvalidCircuitError,
    apply_circuit,
    assemble_unitary,
    n_qubits_of,
)

__all__ = ["TargetSpec", "Oracle", "random_target_circuit", "generate_target", "query"]

RANDOM_1Q = ("T", "SX", "SY")


@dataclass(frozen=True)
class TargetSpec:
    n_qubits: int
    depth: int
    seed: int

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {self.n_qubits}")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")


def random_target_circuit(spec: TargetSpec) -> Circuit:
    """Hadamard wall, ``depth`` rounds of (CZ brickwork, random 1q gates), Hadamard wall.

    Odd rounds pair (0,1), (2,3), ...; even rounds pair (1,2), (3,4), ...
    The random gates are drawn in (round, qubit) order from
    ``default_rng(seed)``.
    """
    n = spec.n_qubits
    rng = np.random.default_rng(spec.seed)
    picks = rng.integers(0, len(RANDOM_1Q), size=(spec.depth, n))
    ops = [Gate("H", (q,)) for q in range(n)]
    for d in range(1, spec.depth + 1):
        start = 0 if d % 2 else 1
        ops += [Gate("CZ", (q, q + 1)) for q in range(start, n - 1, 2)]
        ops += [Gate(RANDOM_1Q[picks[d - 1, q]], (q,)) for q in range(n)]
    ops += [Gate("H", (q,)) for q in range(n)]
    return Circuit(n, tuple(ops))


@dataclass
class Oracle:
    """Black-box access to a target circuit.

    Learners only call :meth:`query`; :meth:`unitary` exists for scoring
    reconstructions and never touches the counter.
    """

    circuit: Circuit = field(repr=False)
    query_count: int = 0
    _unitary: np.ndarray | None = field(default=None, init=False, repr=False)

    @property
    def n_qubits(self) -> int:
        return self.circuit.n_qubits

    def query(self, probe: np.ndarray) -> np.ndarray:
        probe = np.asarray(probe, dtype=complex)
        if probe.ndim != 1 or n_qubits_of(probe) != self.n_qubits:
            raise InvalidCircuitError(
                f"probe of shape {probe.shape} does not fit a {self.n_qubits}-qubit oracle"
            )
        self.query_count += 1
        return apply_circuit(probe, self.circuit)

    def unitary(self) -> np.ndarray:
        if self._unitary is None:
            self._unitary = assemble_unitary(self.circuit)
            self._unitary.setflags(write=False)
        return self._unitary


def generate_target(spec: TargetSpec) -> Oracle:
    return Oracle(random_target_circuit(spec))


def query(oracle: Oracle, probe: np.ndarray) -> np.ndarray:
    return oracle.query(probe)
