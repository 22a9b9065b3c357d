"""Exact statevector simulation.

States are plain complex128 numpy arrays of length ``2**n``.  Qubit 0 is the
most significant bit of the basis index, so ``|10>`` on two qubits is index 2.
Every operation here is pure: inputs are never modified.

Arrays with a trailing column axis (shape ``(2**n, c)``) are accepted wherever
a state is, which is how :func:`assemble_unitary` pushes all basis states
through a circuit in one pass.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

__all__ = [
    "QuantumError",
    "InvalidGateError",
    "InvalidCircuitError",
    "ResourceError",
    "Gate",
    "Circuit",
    "GATE_KINDS",
    "MAX_QUBITS",
    "gate_matrix",
    "basis_state",
    "zero_state",
    "n_qubits_of",
    "apply_gate",
    "apply_circuit",
    "inner_product",
    "assemble_unitary",
    "unitarity_error",
]

MAX_QUBITS = 7


class QuantumError(ValueError):
    """Base class for simulator errors."""


class InvalidGateError(QuantumError):
    pass


class InvalidCircuitError(QuantumError):
    pass


class ResourceError(QuantumError):
    pass


_S2 = 1 / np.sqrt(2)

_FIXED = {
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * pi / 4)]], dtype=complex),
    # principal square roots of X and Y
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
    "SY": 0.5 * np.array([[1 + 1j, -1 - 1j], [1 + 1j, 1 + 1j]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
}
for _m in _FIXED.values():
    _m.setflags(write=False)

_ROTATIONS = ("RY", "RZ")
_TWO_QUBIT = ("CZ", "CNOT")

GATE_KINDS = tuple(_FIXED) + _ROTATIONS


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def gate_matrix(kind: str, theta: float | None = None) -> np.ndarray:
    """Return the 2x2 or 4x4 matrix of a gate kind.

    For two-qubit kinds the first target is the more significant index bit
    (the control for CNOT).
    """
    if kind == "RY":
        return _ry(theta)
    if kind == "RZ":
        return _rz(theta)
    try:
        return _FIXED[kind]
    except KeyError:
        raise InvalidGateError(f"unknown gate kind {kind!r}") from None


@dataclass(frozen=True)
class Gate:
    """One gate application.

    ``theta`` is the rotation angle in radians and must be set exactly for
    RY and RZ.
    """

    kind: str
    targets: tuple[int, ...]
    theta: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise InvalidGateError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        arity = 2 if self.kind in _TWO_QUBIT else 1
        if len(self.targets) != arity:
            raise InvalidGateError(f"{self.kind} takes {arity} target(s), got {self.targets}")
        if arity == 2 and self.targets[0] == self.targets[1]:
            raise InvalidGateError(f"{self.kind} targets must be distinct")
        if any(t < 0 for t in self.targets):
            raise InvalidGateError(f"negative target in {self.targets}")
        if (self.kind in _ROTATIONS) != (self.theta is not None):
            raise InvalidGateError(f"{self.kind}: theta is required for rotations only")
        if self.theta is not None:
            if not np.isfinite(self.theta):
                raise InvalidGateError("rotation angle must be finite")
            object.__setattr__(self, "theta", float(self.theta))

    @property
    def matrix(self) -> np.ndarray:
        return gate_matrix(self.kind, self.theta)

    def to_line(self) -> str:
        parts = [self.kind, *map(str, self.targets)]
        if self.theta is not None:
            parts.append(repr(self.theta))
        return " ".join(parts)

    @classmethod
    def from_line(cls, line: str) -> "Gate":
        kind, *rest = line.split()
        if kind in _ROTATIONS:
            *targets, theta = rest
            return cls(kind, tuple(int(t) for t in targets), float(theta))
        return cls(kind, tuple(int(t) for t in rest))


@dataclass(frozen=True)
class Circuit:
    """An ordered gate list on ``n_qubits`` wires."""

    n_qubits: int
    ops: tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InvalidCircuitError("a circuit needs at least one qubit")
        object.__setattr__(self, "ops", tuple(self.ops))
        for g in self.ops:
            if max(g.targets) >= self.n_qubits:
                raise InvalidGateError(
                    f"{g.to_line()!r} out of range for {self.n_qubits} qubits"
                )

    def __len__(self) -> int:
        return len(self.ops)

    def then(self, other: "Circuit") -> "Circuit":
        """Circuit that runs ``self`` first, then ``other``."""
        if other.n_qubits != self.n_qubits:
            raise InvalidCircuitError("cannot concatenate circuits of different width")
        return Circuit(self.n_qubits, self.ops + other.ops)

    def to_text(self) -> str:
        """Line-oriented serialization: ``GATE q [q2] [angle]`` per line.

        The first line is a ``QUBITS n`` header so the width survives a
        round trip even for empty circuits.
        """
        lines = [f"QUBITS {self.n_qubits}"] + [g.to_line() for g in self.ops]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].startswith("QUBITS"):
            raise InvalidCircuitError("missing QUBITS header")
        n = int(lines[0].split()[1])
        return cls(n, tuple(Gate.from_line(ln) for ln in lines[1:]))


def n_qubits_of(state: np.ndarray) -> int:
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if dim < 2 or 1 << n != dim:
        raise InvalidCircuitError(f"state length {dim} is not a power of two >= 2")
    return n


def basis_state(n_qubits: int, index: int) -> np.ndarray:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def zero_state(n_qubits: int) -> np.ndarray:
    return basis_state(n_qubits, 0)


def _apply_1q(psi: np.ndarray, mat: np.ndarray, q: int, n: int) -> np.ndarray:
    # view as (left, 2, right) around qubit q; right includes any column axis
    left = 1 << q
    view = psi.reshape(left, 2, -1)
    return np.matmul(mat, view).reshape(psi.shape)


def _apply_2q(psi: np.ndarray, mat: np.ndarray, q0: int, q1: int, n: int) -> np.ndarray:
    extra = psi.shape[1:]
    t = psi.reshape((2,) * n + extra)
    t = np.moveaxis(t, (q0, q1), (0, 1))
    moved_shape = t.shape
    out = (mat @ t.reshape(4, -1)).reshape(moved_shape)
    return np.moveaxis(out, (0, 1), (q0, q1)).reshape(psi.shape)


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    """Return ``gate |state>``; the input is left untouched."""
    state = np.asarray(state, dtype=complex)
    n = n_qubits_of(state)
    if max(gate.targets) >= n:
        raise InvalidGateError(f"{gate.to_line()!r} out of range for {n} qubits")
    if len(gate.targets) == 1:
        return _apply_1q(state, gate.matrix, gate.targets[0], n)
    return _apply_2q(state, gate.matrix, gate.targets[0], gate.targets[1], n)


def apply_circuit(state: np.ndarray, circuit: Circuit) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if n_qubits_of(state) != circuit.n_qubits:
        raise InvalidCircuitError(
            f"circuit has {circuit.n_qubits} qubits, state has {n_qubits_of(state)}"
        )
    out = state.copy()
    for g in circuit.ops:
        out = apply_gate(out, g)
    return out


def inner_product(a: np.ndarray, b: np.ndarray) -> complex:
    """<a|b>, conjugating the first argument."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise InvalidCircuitError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def assemble_unitary(circuit: Circuit, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Full ``2**n x 2**n`` matrix; column j is the image of basis state j."""
    if circuit.n_qubits > max_qubits:
        raise ResourceError(
            f"{circuit.n_qubits} qubits exceeds the dense-matrix cap of {max_qubits}"
        )
    return apply_circuit(np.eye(1 << circuit.n_qubits, dtype=complex), circuit)


def unitarity_error(m: np.ndarray) -> float:
    """Frobenius norm of ``M^dagger M - I``."""
    return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))
