import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from alqpt import reference
from alqpt.metrics import UndefinedRatioError, improvement, phase_aligned_similarity, similarity

from conftest import haar_unitary


def test_similarity_examples(rng):
    u = haar_unitary(rng, 4)
    assert similarity(u, u) == 1.0
    assert similarity(u, -u) == pytest.approx(0.0, abs=1e-15)
    c = haar_unitary(rng, 4)
    assert similarity(u, c) == pytest.approx(reference.similarity(u, c), abs=1e-12)


def test_similarity_dimension_mismatch():
    with pytest.raises(ValueError):
        similarity(np.eye(2), np.eye(4))
    with pytest.raises(ValueError):
        phase_aligned_similarity(np.eye(2), np.eye(4))


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.sampled_from([2, 4, 8]))
def test_similarity_bounds(seed, dim):
    rng = np.random.default_rng(seed)
    u, c = haar_unitary(rng, dim), haar_unitary(rng, dim)
    s = similarity(u, c)
    a = phase_aligned_similarity(u, c)
    assert 0.0 <= s <= 1.0
    assert s - 1e-12 <= a.value <= 1.0


@pytest.mark.parametrize("phi", [0.3, -2.0, np.pi])
def test_global_phase_aligned_to_one(phi, rng):
    u = haar_unitary(rng, 4)
    res = phase_aligned_similarity(u, np.exp(1j * phi) * u)
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert not res.degenerate


def test_aligned_matches_grid_search(rng):
    for _ in range(20):
        u, c = haar_unitary(rng, 4), haar_unitary(rng, 4)
        grid = np.linspace(0, 2 * np.pi, 360, endpoint=False)
        values = [similarity(u, np.exp(1j * p) * c) for p in grid]
        best = grid[int(np.argmax(values))]
        # polish the coarse grid optimum within one grid cell
        step = grid[1]
        res = minimize_scalar(
            lambda p: -similarity(u, np.exp(1j * p) * c),
            bounds=(best - step, best + step), method="bounded", options={"xatol": 1e-10},
        )
        assert phase_aligned_similarity(u, c).value == pytest.approx(-res.fun, abs=1e-6)
        assert max(values) <= phase_aligned_similarity(u, c).value + 1e-12


def test_aligned_degenerate_trace():
    u = np.eye(2, dtype=complex)
    c = np.diag([1, -1]).astype(complex)  # tr(U^dagger C) = 0
    res = phase_aligned_similarity(u, c)
    assert res.degenerate
    assert res.value == similarity(u, c)


def test_improvement():
    assert improvement(0.7, 0.7) == 1.0
    assert improvement(0.9, 0.45) == pytest.approx(2.0)
    with pytest.raises(UndefinedRatioError):
        improvement(0.5, 0.0)
    with pytest.raises(ZeroDivisionError):
        improvement(0.5, 1e-13)
