"""Informationally complete probe pools.

Pool index ``i`` is read as ``n`` base-4 digits, most significant digit for
qubit 0; each digit picks that qubit's single-qubit state.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .qcore import MAX_QUBITS

__all__ = ["PoolMode", "ProbePool", "generate_pool", "single_qubit_set", "pool_index_digits"]

_S2 = 1 / np.sqrt(2)


class PoolMode(str, Enum):
    # {|0>, |1>, |+>, |+i>}: the standard IC product set
    STANDARD_IC = "standard"
    # P|0> for P in {I, X, Y, Z}; repeats states up to phase, so not IC
    LITERAL_PAULI = "pauli"


def single_qubit_set(mode: PoolMode | str = PoolMode.STANDARD_IC) -> np.ndarray:
    mode = PoolMode(mode)
    if mode is PoolMode.STANDARD_IC:
        rows = [[1, 0], [0, 1], [_S2, _S2], [_S2, 1j * _S2]]
    else:
        rows = [[1, 0], [0, 1], [0, 1j], [1, 0]]
    return np.array(rows, dtype=complex)


@dataclass(frozen=True)
class ProbePool:
    n_qubits: int
    states: np.ndarray  # (4**n, 2**n), row i is probe i
    mode: PoolMode

    def __len__(self) -> int:
        return self.states.shape[0]

    def __getitem__(self, index: int) -> np.ndarray:
        return self.states[index]


def pool_index_digits(index: int, n_qubits: int) -> tuple[int, ...]:
    return tuple((index >> (2 * (n_qubits - 1 - q))) & 3 for q in range(n_qubits))


def generate_pool(n_qubits: int, mode: PoolMode | str = PoolMode.STANDARD_IC) -> ProbePool:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")
    mode = PoolMode(mode)
    base = single_qubit_set(mode)
    states = base
    for _ in range(n_qubits - 1):
        # append the next (less significant) qubit on the right
        states = np.einsum("ia,jb->ijab", states, base).reshape(
            states.shape[0] * 4, states.shape[1] * 2
        )
    states = np.ascontiguousarray(states)
    states.setflags(write=False)
    return ProbePool(n_qubits, states, mode)
