"""Quick invariant suite behind ``alqpt verify``.

Each check returns ``(ok, detail)``; sample counts are smaller than in the
test suite so the command finishes in seconds.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from . import reference
from .al import Committee, PoolState, emcm_scores, gs_order, gs_select, qbc_scores, select_max
from .ansatz import (
    AnsatzSpec,
    build_ansatz,
    grad_finite_diff,
    grad_param_shift,
    init_params,
    loss,
    loss_direct,
)
from .oracle import TargetSpec, generate_target
from .probes import generate_pool
from .qcore import Gate, apply_gate, assemble_unitary, unitarity_error


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def random_gate(rng: np.random.Generator, n: int) -> Gate:
    kinds = ["H", "T", "SX", "SY", "X", "Y", "Z", "RY", "RZ"] + (["CZ", "CNOT"] if n > 1 else [])
    kind = kinds[rng.integers(len(kinds))]
    if kind in ("CZ", "CNOT"):
        a, b = rng.choice(n, size=2, replace=False)
        return Gate(kind, (int(a), int(b)))
    theta = float(rng.uniform(-np.pi, np.pi)) if kind in ("RY", "RZ") else None
    return Gate(kind, (int(rng.integers(n)),), theta)


def random_pool(rng, n, m):
    probes = np.stack([random_state(rng, n) for _ in range(m)], axis=1)
    ideals = np.stack([random_state(rng, n) for _ in range(m)], axis=1)
    return probes, ideals


def check_norm(rng, samples=200):
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, 8))
        out = apply_gate(random_state(rng, n), random_gate(rng, n))
        worst = max(worst, abs(np.linalg.norm(out) - 1))
    return worst <= 1e-10, f"max norm deviation {worst:.2e}"


def check_gradients(rng, samples=20):
    worst = 0.0
    for _ in range(samples):
        spec = AnsatzSpec(int(rng.integers(1, 4)), int(rng.integers(0, 5)))
        pool = random_pool(rng, spec.n_qubits, int(rng.integers(1, 5)))
        theta = init_params(spec, rng)
        d = grad_param_shift(spec, theta, pool) - grad_finite_diff(spec, theta, pool, 1e-5)
        worst = max(worst, np.abs(d).max())
    return worst <= 1e-6, f"max |param-shift - FD| {worst:.2e}"


def check_loss_identity(rng, samples=200):
    worst = 0.0
    for _ in range(samples):
        spec = AnsatzSpec(int(rng.integers(1, 4)), int(rng.integers(0, 4)))
        pool = random_pool(rng, spec.n_qubits, int(rng.integers(1, 6)))
        theta = init_params(spec, rng)
        worst = max(worst, abs(loss(spec, theta, pool) - loss_direct(spec, theta, pool)))
    return worst <= 1e-12, f"max loss-form gap {worst:.2e}"


def check_unitarity(rng, samples=10):
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(1, 8))
        oracle = generate_target(TargetSpec(n, int(rng.integers(0, 9)), int(rng.integers(2**32))))
        worst = max(worst, unitarity_error(assemble_unitary(oracle.circuit)))
        spec = AnsatzSpec(n, int(rng.integers(0, 9)))
        worst = max(worst, unitarity_error(assemble_unitary(build_ansatz(spec, init_params(spec, rng)))))
    return worst <= 1e-9, f"max ||M^dag M - I||_F {worst:.2e}"


def check_acquisition(rng, samples=3):
    spec = AnsatzSpec(2, 3)
    probes = generate_pool(2)
    bad = 0
    for _ in range(samples):
        members = init_params(spec, rng, 6)
        cand = list(range(16))
        states = probes.states
        committee = Committee(spec, members)
        sel = select_max(cand, qbc_scores(committee, states))
        ref = reference.argmax_lowest(cand, reference.qbc_scores(2, 3, members, states))
        bad += sel != ref
        sel = select_max(cand, emcm_scores(members[0], committee, states))
        ref = reference.argmax_lowest(
            cand, reference.emcm_scores(2, 3, members[0], members, states), tol=1e-6
        )
        bad += sel != ref
        labeled = [int(i) for i in rng.choice(16, size=3, replace=False)]
        state = PoolState(16)
        for i in labeled:
            state.add(i, states[i], states[i])
        ref = reference.gs_select(
            [states[i] for i in labeled], state.unlabeled, [states[i] for i in state.unlabeled]
        )
        bad += gs_select(state, probes) != ref
        bad += gs_order(labeled, probes, 1) != [ref]
    return bad == 0, f"{bad} mismatches against brute force"


CHECKS: dict[str, Callable] = {
    "norm preservation": check_norm,
    "gradient correctness": check_gradients,
    "loss identity": check_loss_identity,
    "unitarity": check_unitarity,
    "acquisition equivalence": check_acquisition,
}


def run_all(seed: int = 0, echo=print) -> bool:
    rng = np.random.default_rng(seed)
    ok_all = True
    for name, fn in CHECKS.items():
        ok, detail = fn(rng)
        ok_all &= ok
        echo(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return ok_all
