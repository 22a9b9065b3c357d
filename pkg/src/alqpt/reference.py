"""Slow, straightforward re-implementations used as cross-checks.

Nothing here shares code with the fast paths: rotations come from matrix
exponentials, gates are embedded with explicit Kronecker products, and
every acquisition rule is a plain loop.
"""
from __future__ import annotations

from functools import reduce

import numpy as np
from scipy.linalg import expm

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_P0 = np.diag([1, 0]).astype(complex)
_P1 = np.diag([0, 1]).astype(complex)

_FIXED = {
    "H": (_X + _Z) / np.sqrt(2),
    "T": expm(1j * np.pi / 8 * np.eye(2)) @ expm(-1j * np.pi / 8 * _Z),
    # principal roots: (1 + i)/2 * I + (1 - i)/2 * P
    "SX": 0.5 * ((1 + 1j) * _I + (1 - 1j) * _X),
    "SY": 0.5 * ((1 + 1j) * _I + (1 - 1j) * _Y),
    "X": _X,
    "Y": _Y,
    "Z": _Z,
}


def rot(pauli: np.ndarray, theta: float) -> np.ndarray:
    return expm(-0.5j * theta * pauli)


def embed_1q(mat: np.ndarray, q: int, n: int) -> np.ndarray:
    return reduce(np.kron, [mat if i == q else _I for i in range(n)])


def embed_controlled(ctrl: int, tgt: int, mat: np.ndarray, n: int) -> np.ndarray:
    a = reduce(np.kron, [_P0 if i == ctrl else _I for i in range(n)])
    b = reduce(np.kron, [_P1 if i == ctrl else (mat if i == tgt else _I) for i in range(n)])
    return a + b


def gate_full(gate, n: int) -> np.ndarray:
    kind, t = gate.kind, gate.targets
    if kind == "RY":
        return embed_1q(rot(_Y, gate.theta), t[0], n)
    if kind == "RZ":
        return embed_1q(rot(_Z, gate.theta), t[0], n)
    if kind == "CNOT":
        return embed_controlled(t[0], t[1], _X, n)
    if kind == "CZ":
        return embed_controlled(t[0], t[1], _Z, n)
    return embed_1q(_FIXED[kind], t[0], n)


def circuit_unitary(circuit) -> np.ndarray:
    n = circuit.n_qubits
    u = np.eye(2**n, dtype=complex)
    for g in circuit.ops:
        u = gate_full(g, n) @ u
    return u


def ansatz_unitary(n: int, depth: int, params) -> np.ndarray:
    """C(theta) built layer by layer from its definition."""
    params = np.asarray(params, dtype=float)
    assert params.shape == (3 * n * (depth + 1),)
    u = np.eye(2**n, dtype=complex)
    k = 0
    for layer in range(depth + 1):
        if layer:
            for q in range(n - 1):
                u = embed_controlled(q, q + 1, _X, n) @ u
        for q in range(n):
            a, b, c = params[k : k + 3]
            k += 3
            single = rot(_Z, c) @ rot(_Y, b) @ rot(_Z, a)
            u = embed_1q(single, q, n) @ u
    return u


def loss_direct(n, depth, params, probes, ideals) -> float:
    u = ansatz_unitary(n, depth, params)
    return float(np.mean([np.linalg.norm(u @ p - y) ** 2 for p, y in zip(probes, ideals)]))


def qbc_scores(n, depth, members, candidates) -> list[float]:
    """Mean Euclidean distance of each member prediction to the normalised mean."""
    unitaries = [ansatz_unitary(n, depth, m) for m in members]
    scores = []
    for psi in candidates:
        preds = [u @ psi for u in unitaries]
        mean = sum(preds)
        norm = np.linalg.norm(mean)
        if norm < 1e-12:
            scores.append(2.0)
            continue
        mean = mean / norm
        scores.append(sum(np.linalg.norm(p - mean) for p in preds) / len(preds))
    return scores


def emcm_scores(n, depth, current, members, candidates) -> list[float]:
    """Ensemble-averaged gradient norm, each component from central differences.

    Uses a step small enough to serve as an independent check on the
    parameter-shift route.
    """
    current = np.asarray(current, dtype=float)
    h = 1e-6
    unitaries = [ansatz_unitary(n, depth, m) for m in members]
    shifted = []
    for i in range(current.size):
        e = np.zeros(current.size)
        e[i] = h
        shifted.append((ansatz_unitary(n, depth, current + e), ansatz_unitary(n, depth, current - e)))
    scores = []
    for psi in candidates:
        labels = [u @ psi for u in unitaries]
        grad = np.zeros(current.size)
        for i, (u_up, u_dn) in enumerate(shifted):
            up, dn = u_up @ psi, u_dn @ psi
            for y in labels:
                # l = ||psi(theta) - y||^2
                grad[i] += (np.linalg.norm(up - y) ** 2 - np.linalg.norm(dn - y) ** 2) / (2 * h)
        grad /= len(labels)
        scores.append(float(np.linalg.norm(grad)))
    return scores


def gs_select(labeled_states, candidate_indices, candidate_states) -> int:
    best_i, best_d = None, -1.0
    for i, psi in zip(candidate_indices, candidate_states):
        d = min(np.linalg.norm(psi - phi) for phi in labeled_states)
        if d > best_d + 1e-12 or (abs(d - best_d) <= 1e-12 and i < best_i):
            best_i, best_d = i, d
    return best_i


def argmax_lowest(indices, scores, tol=1e-9) -> int:
    best = max(scores)
    return min(i for i, s in zip(indices, scores) if s >= best - tol * max(1.0, abs(best)))


def similarity(target: np.ndarray, model: np.ndarray) -> float:
    diff = sum(abs(model[i, j] - target[i, j]) ** 2 for i in range(target.shape[0])
               for j in range(target.shape[1]))
    norm = sum(abs(x) ** 2 for x in target.ravel())
    return 1 - np.sqrt(diff) / (2 * np.sqrt(norm))
