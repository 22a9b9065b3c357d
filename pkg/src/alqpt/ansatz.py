"""The trainable variational circuit C(theta).

Layout: ``k + 1`` single-qubit layers interleaved with ``k`` entangling
layers.  Each single-qubit layer applies Rz, Ry, Rz to every qubit; each
entangling layer is the CNOT chain ``CNOT(q, q+1)`` for ``q = 0 .. n-2``.

Parameters are stored layer-major, then by qubit, then by gate position, so
``theta[3 * (layer * n + qubit) + pos]`` with ``pos`` 0, 1, 2 for the first
Rz, the Ry and the second Rz.

Numerical work goes through a batched engine that carries a leading "model"
axis, which lets a whole committee (or every parameter-shifted copy of one
model) be evaluated in a single pass.  Within a layer the three rotations on
a qubit are fused into one 2x2 matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .qcore import Circuit, Gate, InvalidCircuitError, n_qubits_of

__all__ = [
    "AnsatzSpec",
    "LabeledPair",
    "TrainSchedule",
    "init_params",
    "build_ansatz",
    "evolve",
    "forward",
    "model_unitary",
    "loss",
    "loss_direct",
    "grad_param_shift",
    "shift_derivative",
    "grad_adjoint",
    "grad_finite_diff",
    "sgd_step",
    "train",
    "params_to_json",
    "params_from_json",
]

SHIFT = np.pi / 2


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int
    depth: int

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")

    @property
    def n_params(self) -> int:
        return 3 * self.n_qubits * (self.depth + 1)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits


@dataclass(frozen=True)
class LabeledPair:
    """A probe state and the oracle's output for it."""

    probe: np.ndarray
    ideal: np.ndarray

    def __post_init__(self):
        if self.probe.shape != self.ideal.shape:
            raise InvalidCircuitError("probe and label dimensions differ")
        for v in (self.probe, self.ideal):
            if abs(np.linalg.norm(v) - 1.0) > 1e-8:
                raise ValueError("labeled states must be unit-norm")


@dataclass(frozen=True)
class TrainSchedule:
    """Full-batch gradient descent settings.

    ``gradient`` picks the gradient route: ``"adjoint"`` (reverse-mode,
    exact) or ``"param_shift"``.  Both give the same numbers to rounding.
    """

    lr: float = 0.05
    epochs: int = 200
    gradient: str = "adjoint"

    def __post_init__(self):
        if self.lr < 0:
            raise ValueError("learning rate must be >= 0")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.gradient not in ("adjoint", "param_shift"):
            raise ValueError(f"unknown gradient method {self.gradient!r}")


def init_params(spec: AnsatzSpec, seed, n_models: int | None = None) -> np.ndarray:
    """Uniform draw on [-pi, pi); shape ``(n_params,)`` or ``(n_models, n_params)``."""
    rng = np.random.default_rng(seed)
    shape = spec.n_params if n_models is None else (n_models, spec.n_params)
    return rng.uniform(-np.pi, np.pi, size=shape)


def _check_params(spec: AnsatzSpec, params) -> np.ndarray:
    theta = np.asarray(params, dtype=float)
    if theta.shape[-1:] != (spec.n_params,) or theta.ndim > 2:
        raise ValueError(
            f"expected {spec.n_params} parameters for n={spec.n_qubits}, k={spec.depth}, "
            f"got shape {theta.shape}"
        )
    if not np.all(np.isfinite(theta)):
        raise ValueError("parameters must be finite")
    return theta


def build_ansatz(spec: AnsatzSpec, params) -> Circuit:
    theta = _check_params(spec, params)
    if theta.ndim != 1:
        raise ValueError("build_ansatz takes a single parameter vector")
    n = spec.n_qubits
    ops = []
    for layer in range(spec.depth + 1):
        if layer:
            ops.extend(Gate("CNOT", (q, q + 1)) for q in range(n - 1))
        for q in range(n):
            a, b, c = theta[3 * (layer * n + q) : 3 * (layer * n + q) + 3]
            ops += [Gate("RZ", (q,), a), Gate("RY", (q,), b), Gate("RZ", (q,), c)]
    return Circuit(n, tuple(ops))


# ---------------------------------------------------------------------------
# batched engine
# ---------------------------------------------------------------------------

_Z = np.diag([1.0, -1.0]).astype(complex)


def _fused(theta: np.ndarray, spec: AnsatzSpec):
    """Fused layer matrices Rz(c) Ry(b) Rz(a), shape (M, k+1, n, 2, 2).

    Also returns the angle arrays, which the gradient needs.
    """
    t = theta.reshape(theta.shape[0], spec.depth + 1, spec.n_qubits, 3)
    a, b, c = t[..., 0], t[..., 1], t[..., 2]
    cb, sb = np.cos(b / 2), np.sin(b / 2)
    u = np.empty(a.shape + (2, 2), dtype=complex)
    u[..., 0, 0] = np.exp(-0.5j * (a + c)) * cb
    u[..., 0, 1] = -np.exp(0.5j * (a - c)) * sb
    u[..., 1, 0] = np.exp(-0.5j * (a - c)) * sb
    u[..., 1, 1] = np.exp(0.5j * (a + c)) * cb
    return u, c


@lru_cache(maxsize=None)
def _chain_perm(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Index maps for the CNOT chain E: ``(E x) = x[fwd]`` and ``(E^T x) = x[bwd]``."""
    idx = np.arange(1 << n)
    image = idx.copy()
    for q in range(n - 1):
        ctrl = (image >> (n - 1 - q)) & 1
        image = image ^ (ctrl << (n - 2 - q))
    fwd = np.empty_like(image)
    fwd[image] = idx
    fwd.setflags(write=False)
    image.setflags(write=False)
    return fwd, image


def _apply_layer(x: np.ndarray, u: np.ndarray, n: int) -> np.ndarray:
    """Apply per-model single-qubit matrices u (M, n, 2, 2) to x (M', D, c)."""
    m = max(x.shape[0], u.shape[0])
    tail = x.shape[1:]
    for q in range(n):
        view = x.reshape(x.shape[0], 1 << q, 2, -1)
        x = np.matmul(u[:, q, None], view).reshape((m,) + tail)
    return x


def _run(u: np.ndarray, x: np.ndarray, n: int, keep: bool = False):
    fwd, _ = _chain_perm(n)
    layers = []
    for layer in range(u.shape[1]):
        if layer:
            x = x[:, fwd]
        x = _apply_layer(x, u[:, layer], n)
        if keep:
            layers.append(x)
    return x, layers


def _as_batch(states: np.ndarray) -> tuple[np.ndarray, bool]:
    states = np.asarray(states, dtype=complex)
    vector = states.ndim == 1
    cols = states[:, None] if vector else states
    return cols[None], vector


def evolve(spec: AnsatzSpec, params, states) -> np.ndarray:
    """Apply C(theta) to a state or a column stack of states.

    ``params`` may be a single vector or an ``(M, n_params)`` stack; a
    stack adds a leading model axis to the result.
    """
    theta = _check_params(spec, params)
    x, vector = _as_batch(states)
    if x.shape[1] != spec.dim:
        raise InvalidCircuitError(
            f"state has {n_qubits_of(x[0])} qubits, ansatz has {spec.n_qubits}"
        )
    single = theta.ndim == 1
    u, _ = _fused(np.atleast_2d(theta), spec)
    out, _ = _run(u, x, spec.n_qubits)
    if vector:
        out = out[..., 0]
    return out[0] if single else out


def forward(spec: AnsatzSpec, params, probe) -> np.ndarray:
    """Predicted label C(theta)|probe>."""
    theta = _check_params(spec, params)
    if theta.ndim != 1 or np.ndim(probe) != 1:
        raise ValueError("forward takes one parameter vector and one state")
    return evolve(spec, theta, probe)


def model_unitary(spec: AnsatzSpec, params) -> np.ndarray:
    return evolve(spec, params, np.eye(spec.dim, dtype=complex))


def _pool_matrices(pool) -> tuple[np.ndarray, np.ndarray]:
    """(probes, ideals) as (D, m) column stacks."""
    if isinstance(pool, tuple) and len(pool) == 2 and isinstance(pool[0], np.ndarray):
        probes, ideals = pool
    else:
        pool = list(pool)
        if not pool:
            raise ValueError("labeled pool is empty")
        probes = np.stack([p.probe for p in pool], axis=1)
        ideals = np.stack([p.ideal for p in pool], axis=1)
    probes = np.asarray(probes, dtype=complex)
    ideals = np.asarray(ideals, dtype=complex)
    if probes.ndim != 2 or probes.shape != ideals.shape or probes.shape[1] == 0:
        raise ValueError("labeled pool is empty or malformed")
    return probes, ideals


def _reduced(probes: np.ndarray, ideals: np.ndarray):
    # sum_i Re<ideal_i|C|probe_i> = Re tr(C P I^dagger), so more than D pairs
    # can be replaced by D columns without changing loss or gradient.
    dim, m = probes.shape
    if m > dim:
        return probes @ ideals.conj().T, np.eye(dim, dtype=complex), m
    return probes, ideals, m


def _overlaps(spec: AnsatzSpec, theta2d: np.ndarray, probes, ideals) -> np.ndarray:
    """Re<ideal_i|C(theta_j)|probe_i> for every model j and pair i, shape (M, m)."""
    u, _ = _fused(theta2d, spec)
    out, _ = _run(u, probes[None], spec.n_qubits)
    return np.einsum("dm,jdm->jm", ideals.conj(), out).real


def loss(spec: AnsatzSpec, params, pool) -> float | np.ndarray:
    """Mean squared error via (2/m) sum [1 - Re<ideal|C|probe>], clipped to [0, 4]."""
    theta = _check_params(spec, params)
    probes, ideals = _pool_matrices(pool)
    x0, y, m = _reduced(probes, ideals)
    u, _ = _fused(np.atleast_2d(theta), spec)
    out, _ = _run(u, x0[None], spec.n_qubits)
    f = np.einsum("dc,jdc->j", y.conj(), out).real
    value = np.clip(2.0 - 2.0 * f / m, 0.0, 4.0)
    return float(value[0]) if theta.ndim == 1 else value


def loss_direct(spec: AnsatzSpec, params, pool) -> float:
    """Same loss computed as (1/m) sum ||C|probe> - |ideal>||^2."""
    theta = _check_params(spec, params)
    probes, ideals = _pool_matrices(pool)
    pred = evolve(spec, theta, probes)
    return float(np.mean(np.sum(np.abs(pred - ideals) ** 2, axis=0)))


def _grad_overlap(spec: AnsatzSpec, theta2d: np.ndarray, x0, y, per_column=False):
    """Reverse-mode gradient of Re tr(Y^dagger C(theta) X0).

    Shape (M, n_params), or (M, c, n_params) with ``per_column``, where
    column i contributes Re<y_i|C|x0_i> on its own.
    """
    n, k1 = spec.n_qubits, spec.depth + 1
    u, c_angle = _fused(theta2d, spec)
    _, layers = _run(u, x0[None], n, keep=True)
    _, bwd = _chain_perm(n)
    big_m = theta2d.shape[0]
    cols = x0.shape[1]
    lam = np.broadcast_to(y[None], (big_m,) + y.shape)
    kshape = (big_m, cols, k1, n, 2, 2) if per_column else (big_m, k1, n, 2, 2)
    kmat = np.empty(kshape, dtype=complex)
    contraction = "mlahc,mlbhc->mcab" if per_column else "mlahc,mlbhc->mab"
    udag = u.conj().swapaxes(-1, -2)
    for layer in range(k1 - 1, -1, -1):
        x = layers[layer]
        lam_conj = lam.conj()
        for q in range(n):
            # K[a, b] = sum over the other qubits (and columns, unless
            # per_column) of x[.., a, ..] conj(lam[.., b, ..])
            out = kmat[:, :, layer, q] if per_column else kmat[:, layer, q]
            out[...] = np.einsum(
                contraction,
                x.reshape(big_m, 1 << q, 2, -1, cols),
                lam_conj.reshape(big_m, 1 << q, 2, -1, cols),
            )
        lam = _apply_layer(lam, udag[:, layer], n)
        if layer:
            lam = lam[:, bwd]

    # d(layer)/dx = G_x (layer) with G_x acting on one qubit; the derivative
    # of the overlap is then Re tr(G_x K).
    g_c = np.broadcast_to(-0.5j * _Z, u.shape)
    e = np.exp(-1j * c_angle)
    g_b = np.zeros(u.shape, dtype=complex)
    g_b[..., 0, 1] = -0.5 * e
    g_b[..., 1, 0] = 0.5 * e.conj()
    g_a = -0.5j * (u @ _Z @ udag)
    if per_column:
        g_a, g_b, g_c = (g[:, None] for g in (g_a, g_b, g_c))
    parts = [
        np.sum(g.swapaxes(-1, -2) * kmat, axis=(-2, -1)).real for g in (g_a, g_b, g_c)
    ]
    grad = np.stack(parts, axis=-1)
    return grad.reshape(grad.shape[: 2 if per_column else 1] + (-1,))


def grad_adjoint(spec: AnsatzSpec, params, pool) -> np.ndarray:
    """Exact loss gradient by reverse-mode differentiation of the statevector."""
    theta = _check_params(spec, params)
    probes, ideals = _pool_matrices(pool)
    x0, y, m = _reduced(probes, ideals)
    g = -2.0 / m * _grad_overlap(spec, np.atleast_2d(theta), x0, y)
    return g[0] if theta.ndim == 1 else g


def shift_derivative(o_plus, o_minus, shift: float = SHIFT):
    """Derivative of an overlap from its values at theta_i +/- shift.

    Each parameter enters C(theta) through one gate exp(-i theta P / 2), so
    an overlap that is linear in C is a single sinusoid of theta_i / 2 and
    dO/dtheta_i = (O+ - O-) / (4 sin(shift / 2)) exactly.  For shift = pi/2
    this is (O+ - O-) / (2 sqrt 2), not (O+ - O-) / 2: the factor 1/2 is the
    rule for expectation values, which are quadratic in C.
    """
    return (np.asarray(o_plus) - np.asarray(o_minus)) / (4.0 * np.sin(shift / 2))


def grad_param_shift(spec: AnsatzSpec, params, pool, shift: float = SHIFT) -> np.ndarray:
    """Loss gradient from the parameter-shift rule.

    For every parameter, the overlap O = Re<ideal|C|probe> of each pair is
    evaluated at theta_i +/- shift, differentiated with
    :func:`shift_derivative`, and chained with dL/dO = -2/m.
    """
    theta = _check_params(spec, params)
    probes, ideals = _pool_matrices(pool)
    m = probes.shape[1]
    batch = np.atleast_2d(theta)
    p = spec.n_params
    shifts = shift * np.eye(p)
    grads = np.empty_like(batch)
    for j, t in enumerate(batch):
        o = _overlaps(spec, np.concatenate([t + shifts, t - shifts]), probes, ideals)
        d_o = shift_derivative(o[:p], o[p:], shift)
        grads[j] = (-2.0 / m) * d_o.sum(axis=1)
    return grads[0] if theta.ndim == 1 else grads


def grad_finite_diff(spec: AnsatzSpec, params, pool, h: float = 1e-5) -> np.ndarray:
    """Central differences of the (unclipped) loss."""
    if h <= 0:
        raise ValueError("step h must be positive")
    theta = _check_params(spec, params)
    if theta.ndim != 1:
        return np.stack([grad_finite_diff(spec, t, pool, h) for t in theta])
    probes, ideals = _pool_matrices(pool)
    m = probes.shape[1]
    steps = h * np.eye(spec.n_params)
    o = _overlaps(spec, np.concatenate([theta + steps, theta - steps]), probes, ideals)
    f = o.sum(axis=1)
    p = spec.n_params
    # loss = 2 - 2 f / m
    return -2.0 / m * (f[:p] - f[p:]) / (2 * h)


def sgd_step(params, grad, lr: float) -> np.ndarray:
    """One gradient-descent update ``params - lr * grad``."""
    params = np.asarray(params, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if params.shape != grad.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, grad {grad.shape}")
    if lr < 0:
        raise ValueError("learning rate must be >= 0")
    return params - lr * grad


def train(spec: AnsatzSpec, params, pool, schedule: TrainSchedule = TrainSchedule()):
    """Run ``schedule.epochs`` full-pool descent steps and return the new parameters.

    A ``(M, n_params)`` stack trains M independent models on the same pool.
    """
    theta = _check_params(spec, params).copy()
    probes, ideals = _pool_matrices(pool)
    if schedule.epochs == 0:
        return theta
    if schedule.gradient == "param_shift":
        for _ in range(schedule.epochs):
            theta = sgd_step(theta, grad_param_shift(spec, theta, (probes, ideals)), schedule.lr)
        return theta
    x0, y, m = _reduced(probes, ideals)
    batch = np.atleast_2d(theta)
    scale = -2.0 / m
    for _ in range(schedule.epochs):
        batch = sgd_step(batch, scale * _grad_overlap(spec, batch, x0, y), schedule.lr)
    return batch[0] if theta.ndim == 1 else batch


def params_to_json(params) -> list[float]:
    return [float(v) for v in np.asarray(params, dtype=float).ravel()]


def params_from_json(values: Sequence[float]) -> np.ndarray:
    return np.asarray(values, dtype=float)
