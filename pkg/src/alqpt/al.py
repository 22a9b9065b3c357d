"""Acquisition functions and the pool-based active learning loop.

Strategies:

* QBC: committee disagreement, the mean Euclidean distance of each member's
  prediction to the normalised committee mean state.
* EMCM: norm of the expected loss gradient of the base model when the
  unknown label is replaced by each ensemble member's prediction.
* GS: max-min distance to the already labeled probes (model free).
* RAND: uniform over the unlabeled probes.

Ties are always broken toward the lowest pool index.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .ansatz import (
    AnsatzSpec,
    LabeledPair,
    TrainSchedule,
    _grad_overlap,
    _overlaps,
    evolve,
    model_unitary,
    init_params,
    loss,
    model_unitary,
    shift_derivative,
    train,
    SHIFT,
)
from .metrics import phase_aligned_similarity, similarity
from .oracle import Oracle
from .probes import ProbePool

__all__ = [
    "StrategyKind",
    "Strategy",
    "Committee",
    "PoolState",
    "ALConfig",
    "RunRecord",
    "select_max",
    "state_distance",
    "qbc_score",
    "qbc_scores",
    "emcm_score",
    "emcm_scores",
    "gs_select",
    "gs_order",
    "rand_select",
    "bootstrap_indices",
    "al_run",
]

# columns scored per chunk; bounds memory at 7 qubits (4**7 candidates)
_CHUNK = 2048


class StrategyKind(str, Enum):
    QBC = "QBC"
    EMCM = "EMCM"
    GS = "GS"
    RAND = "RAND"


@dataclass(frozen=True)
class Strategy:
    kind: StrategyKind
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", StrategyKind(self.kind))

    @property
    def model_based(self) -> bool:
        return self.kind in (StrategyKind.QBC, StrategyKind.EMCM)


@dataclass(frozen=True)
class Committee:
    spec: AnsatzSpec
    members: np.ndarray  # (n_vqc, n_params)

    def __post_init__(self):
        members = np.asarray(self.members, dtype=float)
        if members.ndim != 2 or members.shape[0] < 2:
            raise ValueError("a committee needs at least two members")
        if members.shape[1] != self.spec.n_params:
            raise ValueError("member length does not match the ansatz")
        object.__setattr__(self, "members", members)

    def __len__(self) -> int:
        return self.members.shape[0]


class PoolState:
    """Labeled/unlabeled split of a probe pool.

    ``unlabeled`` is kept sorted, so position order equals pool-index order.
    """

    def __init__(self, pool_size: int):
        self.pool_size = pool_size
        self.unlabeled: list[int] = list(range(pool_size))
        self.labeled_indices: list[int] = []
        self._probes: list[np.ndarray] = []
        self._ideals: list[np.ndarray] = []

    def add(self, index: int, probe: np.ndarray, ideal: np.ndarray) -> None:
        if index in self.labeled_indices:
            raise ValueError(f"pool index {index} is already labeled")
        self.unlabeled.remove(index)
        self.labeled_indices.append(index)
        self._probes.append(np.asarray(probe, dtype=complex))
        self._ideals.append(np.asarray(ideal, dtype=complex))

    @property
    def labeled(self) -> list[LabeledPair]:
        return [LabeledPair(p, y) for p, y in zip(self._probes, self._ideals)]

    def matrices(self) -> tuple[np.ndarray, np.ndarray]:
        return np.stack(self._probes, axis=1), np.stack(self._ideals, axis=1)

    def __len__(self) -> int:
        return len(self.labeled_indices)


def select_max(candidates: Sequence[int], scores, rtol: float = 1e-9, atol: float = 1e-12) -> int:
    """Candidate with the highest score; near-ties go to the lowest index."""
    scores = np.asarray(scores, dtype=float)
    if len(candidates) == 0:
        raise ValueError("no candidates to select from")
    if scores.shape != (len(candidates),):
        raise ValueError("one score per candidate required")
    best = scores.max()
    tied = np.flatnonzero(scores >= best - (atol + rtol * abs(best)))
    return int(min(candidates[i] for i in tied))


def state_distance(a: np.ndarray, b: np.ndarray, phase_invariant: bool = False):
    """Euclidean distance between amplitude vectors (along axis 0).

    With ``phase_invariant`` the distance is minimised over a global phase,
    ``sqrt(2 - 2 |<a|b>|)`` for unit vectors.
    """
    if phase_invariant:
        ov = np.abs(np.sum(np.conj(a) * b, axis=0))
        return np.sqrt(np.maximum(0.0, 2.0 - 2.0 * ov))
    return np.linalg.norm(a - b, axis=0)


def _qbc_from_predictions(preds: np.ndarray, squared: bool, phase_invariant: bool) -> np.ndarray:
    # preds: (n_vqc, D, u)
    total = preds.sum(axis=0)
    norms = np.linalg.norm(total, axis=0)
    degenerate = norms < 1e-12
    mean = total / np.where(degenerate, 1.0, norms)
    d = np.stack([state_distance(p, mean, phase_invariant) for p in preds])
    if squared:
        d = d**2
    scores = d.mean(axis=0)
    scores[degenerate] = 4.0 if squared else 2.0
    return scores


def _predictor(spec: AnsatzSpec, members: np.ndarray, count: int):
    """Map a (D, c) block of probes to member predictions (n_vqc, D, c).

    Scoring more probes than the Hilbert-space dimension is cheaper with
    the member unitaries in hand: one matrix product instead of a
    gate-by-gate sweep over every probe.
    """
    if count <= spec.dim:
        return lambda cols: evolve(spec, members, cols)
    unitaries = model_unitary(spec, members)
    return lambda cols: unitaries @ cols


def qbc_score(committee: Committee, probe: np.ndarray, squared: bool = False,
              phase_invariant: bool = False) -> float:
    return float(qbc_scores(committee, np.asarray(probe)[None], squared, phase_invariant)[0])


def qbc_scores(committee: Committee, probes: np.ndarray, squared: bool = False,
               phase_invariant: bool = False) -> np.ndarray:
    """QBC disagreement for each row of ``probes``."""
    probes = np.asarray(probes, dtype=complex)
    out = np.empty(probes.shape[0])
    predict = _predictor(committee.spec, committee.members, probes.shape[0])
    for lo in range(0, probes.shape[0], _CHUNK):
        cols = probes[lo : lo + _CHUNK].T
        preds = predict(cols)
        out[lo : lo + _CHUNK] = _qbc_from_predictions(preds, squared, phase_invariant)
    return out


def emcm_score(current: np.ndarray, ensemble: Committee, probe: np.ndarray) -> float:
    """Expected model change for one probe, via the parameter-shift rule.

    Each member k supplies a pseudo-label C(theta_k)|probe>; the loss
    derivative dl/dO_k is -2 and dO_k/dtheta_i comes from shifted overlaps.
    """
    spec = ensemble.spec
    probe = np.asarray(probe, dtype=complex)
    p = spec.n_params
    shifts = SHIFT * np.eye(p)
    shifted = np.concatenate([current + shifts, current - shifts])
    grad = np.zeros(p)
    for theta_k in ensemble.members:
        label = evolve(spec, theta_k, probe)
        o = _overlaps(spec, shifted, probe[:, None], label[:, None])[:, 0]
        grad += -2.0 * shift_derivative(o[:p], o[p:])
    grad /= len(ensemble)
    return float(np.linalg.norm(grad))


def emcm_scores(current: np.ndarray, ensemble: Committee, probes: np.ndarray) -> np.ndarray:
    """:func:`emcm_score` for every row of ``probes`` in one reverse pass.

    The ensemble average of Re<label_k|C(theta)|probe> equals the overlap
    with the mean pseudo-label, so one gradient per probe suffices.
    """
    spec = ensemble.spec
    probes = np.asarray(probes, dtype=complex)
    theta = np.asarray(current, dtype=float)[None]
    out = np.empty(probes.shape[0])
    predict = _predictor(spec, ensemble.members, probes.shape[0])
    for lo in range(0, probes.shape[0], _CHUNK):
        cols = probes[lo : lo + _CHUNK].T
        mean_label = predict(cols).mean(axis=0)
        g = -2.0 * _grad_overlap(spec, theta, cols, mean_label, per_column=True)[0]
        out[lo : lo + _CHUNK] = np.linalg.norm(g, axis=1)
    return out


def _min_distances(probes: ProbePool, candidates, labeled, phase_invariant):
    cand = probes.states[list(candidates)].T
    best = np.full(len(candidates), np.inf)
    for j in labeled:
        best = np.minimum(best, state_distance(cand, probes.states[j][:, None], phase_invariant))
    return best


def gs_select(pool_state: PoolState, probes: ProbePool, phase_invariant: bool = False) -> int:
    """Unlabeled probe farthest (max-min) from the labeled set."""
    if not pool_state.unlabeled:
        raise ValueError("unlabeled pool is empty")
    if not pool_state.labeled_indices:
        raise ValueError("greedy sampling needs at least one labeled probe")
    d = _min_distances(probes, pool_state.unlabeled, pool_state.labeled_indices, phase_invariant)
    return select_max(pool_state.unlabeled, d)


def gs_order(labeled: Sequence[int], probes: ProbePool, count: int,
             phase_invariant: bool = False) -> list[int]:
    """The next ``count`` greedy selections, computed up front.

    Labels never enter the max-min rule, so this equals calling
    :func:`gs_select` after every query.
    """
    if not labeled:
        raise ValueError("greedy sampling needs at least one labeled probe")
    chosen = set(labeled)
    unlabeled = [i for i in range(len(probes)) if i not in chosen]
    if count > len(unlabeled):
        raise ValueError("not enough unlabeled probes")
    best = _min_distances(probes, unlabeled, labeled, phase_invariant)
    cand = probes.states[unlabeled].T
    order = []
    for _ in range(count):
        pick = select_max(unlabeled, best)
        pos = unlabeled.index(pick)
        order.append(pick)
        del unlabeled[pos]
        best = np.delete(best, pos)
        cand = np.delete(cand, pos, axis=1)
        if unlabeled:
            best = np.minimum(best, state_distance(cand, probes.states[pick][:, None], phase_invariant))
    return order


def rand_select(pool_state: PoolState, rng: np.random.Generator) -> int:
    if not pool_state.unlabeled:
        raise ValueError("unlabeled pool is empty")
    return pool_state.unlabeled[int(rng.integers(len(pool_state.unlabeled)))]


def bootstrap_indices(pool_size: int, count: int, seed) -> list[int]:
    rng = np.random.default_rng(seed)
    return [int(i) for i in rng.choice(pool_size, size=count, replace=False)]


@dataclass(frozen=True)
class ALConfig:
    """Settings for one active-learning run.

    ``init_seed`` and ``bootstrap_seed`` are shared by all strategies of a
    repeat so they start from identical models and labels.
    """

    spec: AnsatzSpec
    budget: int
    bootstrap: int = 1
    committee_size: int = 6
    schedule: TrainSchedule = field(default_factory=TrainSchedule)
    init_seed: int = 0
    bootstrap_seed: int = 0
    repeat: int = 0
    squared_qbc: bool = False
    phase_invariant: bool = False
    ensemble_refresh: int = 1
    record_timing: bool = False

    def __post_init__(self):
        if self.bootstrap < 1:
            raise ValueError("bootstrap must be >= 1")
        if self.budget < self.bootstrap:
            raise ValueError("budget must be >= bootstrap")
        if self.committee_size < 2:
            raise ValueError("committee_size must be >= 2")
        if self.ensemble_refresh < 1:
            raise ValueError("ensemble_refresh must be >= 1")


@dataclass(frozen=True)
class RunRecord:
    strategy: str
    repeat: int
    step: int
    labels_used: int
    loss: float
    similarity: float
    similarity_phase_aligned: float
    wall_time_s: float | None = None


ScoreHook = Callable[[np.ndarray], np.ndarray]


def al_run(strategy: Strategy, oracle: Oracle, probes: ProbePool, config: ALConfig,
           score_hook: ScoreHook | None = None) -> list[RunRecord]:
    """Bootstrap, then Evaluate-Select-Query-Add-Update until the budget is spent.

    Step 0 is the bootstrap point.  Every step trains the base model (and
    for QBC/EMCM the rest of the committee) warm-started from the previous
    parameters, then records the base model's loss and similarity.
    """
    spec = config.spec
    if probes.n_qubits != spec.n_qubits or oracle.n_qubits != spec.n_qubits:
        raise ValueError("ansatz, probe pool and oracle disagree on qubit count")
    if config.budget > len(probes):
        raise ValueError(f"budget {config.budget} exceeds pool size {len(probes)}")
    start_count = oracle.query_count
    target = oracle.unitary()
    rng = np.random.default_rng(strategy.rng_seed)
    state = PoolState(len(probes))
    kind = strategy.kind

    n_models = config.committee_size if strategy.model_based else 1
    params = init_params(spec, config.init_seed, config.committee_size)[:n_models]
    records: list[RunRecord] = []

    def record(step: int, t0: float) -> None:
        base = params[0]
        c = model_unitary(spec, base)
        records.append(
            RunRecord(
                strategy=kind.value,
                repeat=config.repeat,
                step=step,
                labels_used=len(state),
                loss=loss(spec, base, state.matrices()),
                similarity=similarity(target, c),
                similarity_phase_aligned=phase_aligned_similarity(target, c).value,
                wall_time_s=time.perf_counter() - t0 if config.record_timing else None,
            )
        )

    t0 = time.perf_counter()
    for i in bootstrap_indices(len(probes), config.bootstrap, config.bootstrap_seed):
        state.add(i, probes[i], oracle.query(probes[i]))
    params = train(spec, params, state.matrices(), config.schedule)
    record(0, t0)

    n_steps = config.budget - config.bootstrap
    if kind is StrategyKind.GS and n_steps:
        planned = iter(gs_order(state.labeled_indices, probes, n_steps, config.phase_invariant))

    for step in range(1, n_steps + 1):
        t0 = time.perf_counter()
        candidates = state.unlabeled
        if strategy.model_based:
            cand_states = probes.states[candidates]
            committee = Committee(spec, params)
            if kind is StrategyKind.QBC:
                scores = qbc_scores(committee, cand_states, config.squared_qbc, config.phase_invariant)
            else:
                scores = emcm_scores(params[0], committee, cand_states)
            if score_hook is not None:
                scores = score_hook(scores)
            pick = select_max(candidates, scores)
        elif kind is StrategyKind.GS:
            pick = next(planned)
        else:
            pick = rand_select(state, rng)

        state.add(pick, probes[pick], oracle.query(probes[pick]))
        pool = state.matrices()
        if kind is StrategyKind.EMCM and step % config.ensemble_refresh:
            params = params.copy()
            params[:1] = train(spec, params[:1], pool, config.schedule)
        else:
            params = train(spec, params, pool, config.schedule)
        record(step, t0)

    if oracle.query_count - start_count != config.budget:
        raise RuntimeError("query accounting mismatch")
    return records
