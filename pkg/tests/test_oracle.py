import numpy as np
import pytest

from alqpt import reference
from alqpt.oracle import RANDOM_1Q, TargetSpec, generate_target, query, random_target_circuit
from alqpt.qcore import Circuit, InvalidCircuitError, assemble_unitary, basis_state, unitarity_error

from conftest import rand_state


@pytest.mark.parametrize("n", range(1, 8))
def test_depth_zero_is_identity(n):
    oracle = generate_target(TargetSpec(n, 0, seed=5))
    if n <= 4:
        np.testing.assert_allclose(oracle.unitary(), np.eye(2**n), atol=1e-12)
    psi = rand_state(np.random.default_rng(n), n)
    np.testing.assert_allclose(query(oracle, psi), psi, atol=1e-12)


def test_deterministic_per_seed():
    a = random_target_circuit(TargetSpec(4, 6, seed=123))
    b = random_target_circuit(TargetSpec(4, 6, seed=123))
    assert a == b
    assert a.to_text() == b.to_text()


def test_structure():
    n, depth = 5, 4
    ops = random_target_circuit(TargetSpec(n, depth, seed=9)).ops
    assert [g.kind for g in ops[:n]] == ["H"] * n
    assert [g.kind for g in ops[-n:]] == ["H"] * n
    body = list(ops[n:-n])
    for d in range(1, depth + 1):
        pairs = [(0, 1), (2, 3)] if d % 2 else [(1, 2), (3, 4)]
        czs, body = body[: len(pairs)], body[len(pairs):]
        assert [(g.kind, g.targets) for g in czs] == [("CZ", p) for p in pairs]
        singles, body = body[:n], body[n:]
        assert [g.targets for g in singles] == [(q,) for q in range(n)]
        assert all(g.kind in RANDOM_1Q for g in singles)
    assert body == []


def test_random_gate_draws_follow_seeded_stream():
    spec = TargetSpec(3, 4, seed=77)
    picks = np.random.default_rng(77).integers(0, 3, size=(4, 3))
    singles = [g.kind for g in random_target_circuit(spec).ops if g.kind in RANDOM_1Q]
    assert singles == [RANDOM_1Q[i] for i in picks.ravel()]


def test_unitarity_and_reference():
    oracle = generate_target(TargetSpec(3, 4, seed=42))
    u = oracle.unitary()
    assert unitarity_error(u) <= 1e-9
    np.testing.assert_allclose(u, reference.circuit_unitary(oracle.circuit), atol=1e-12)


def test_query_matches_unitary_column_and_counts():
    oracle = generate_target(TargetSpec(2, 3, seed=1))
    u = oracle.unitary()
    assert oracle.query_count == 0
    np.testing.assert_allclose(oracle.query(basis_state(2, 0)), u[:, 0], atol=1e-12)
    for b in range(1, 6):
        oracle.query(basis_state(2, b % 4))
    assert oracle.query_count == 6


def test_unitary_does_not_count_and_is_read_only():
    oracle = generate_target(TargetSpec(2, 2, seed=3))
    u = oracle.unitary()
    assert oracle.query_count == 0
    with pytest.raises(ValueError):
        u[0, 0] = 0


def test_query_dimension_mismatch():
    oracle = generate_target(TargetSpec(2, 1, seed=0))
    with pytest.raises(InvalidCircuitError):
        oracle.query(basis_state(3, 0))
    assert oracle.query_count == 0


@pytest.mark.parametrize("args", [(0, 1, 0), (8, 1, 0), (2, -1, 0)])
def test_spec_validation(args):
    with pytest.raises(ValueError):
        TargetSpec(*args)


def test_seed_disjoint_targets_differ():
    rng = np.random.default_rng(0)
    identical = 0
    for _ in range(100):
        s1, s2 = rng.choice(2**32, size=2, replace=False)
        identical += random_target_circuit(TargetSpec(3, 4, int(s1))) == random_target_circuit(
            TargetSpec(3, 4, int(s2))
        )
    assert identical == 0


def test_text_format_replays():
    c = random_target_circuit(TargetSpec(4, 5, seed=11))
    replayed = Circuit.from_text(c.to_text())
    np.testing.assert_array_equal(assemble_unitary(replayed), assemble_unitary(c))
    assert c.to_text().splitlines()[1] == "H 0"
