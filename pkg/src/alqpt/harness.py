"""Experiment orchestration: configs, repeats, summaries and output files."""
from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Iterable

import numpy as np

from .al import ALConfig, RunRecord, Strategy, StrategyKind, al_run
from .ansatz import AnsatzSpec, TrainSchedule
from .metrics import UndefinedRatioError, improvement, phase_aligned_similarity, similarity
from .oracle import TargetSpec, generate_target
from .probes import generate_pool

__all__ = [
    "DEPTH_TABLE",
    "CSV_HEADER",
    "ExperimentConfig",
    "ExperimentError",
    "ExperimentResult",
    "repeat_seeds",
    "run_experiment",
    "summarize",
    "records_to_csv",
    "read_records",
    "write_outputs",
    "similarity",
    "phase_aligned_similarity",
    "improvement",
]

log = logging.getLogger(__name__)

# VQC depth per qubit count used in the reference experiments
DEPTH_TABLE = {2: 3, 3: 5, 4: 7, 5: 8, 6: 8, 7: 8}

CSV_HEADER = (
    "strategy",
    "repeat",
    "step",
    "labels_used",
    "loss",
    "similarity",
    "similarity_phase_aligned",
    "wall_time_s",
)


class ExperimentError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce an experiment.

    ``None`` fields are filled by :meth:`resolved`: VQC depth from
    :data:`DEPTH_TABLE` (1 for a single qubit), target depth equal to the
    VQC depth, and a budget of ``min(4**n, 32)`` labels.
    """

    n_qubits: int = 2
    vqc_depth: int | None = None
    target_depth: int | None = None
    strategies: tuple[str, ...] = ("QBC", "EMCM", "GS", "RAND")
    budget: int | None = None
    bootstrap: int = 1
    committee_size: int = 6
    repeats: int = 30
    base_seed: int = 0
    lr: float = 0.05
    epochs: int = 200
    gradient: str = "adjoint"
    pool_mode: str = "standard"
    squared_qbc: bool = False
    phase_invariant: bool = False
    ensemble_refresh: int = 1
    record_timing: bool = False
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(StrategyKind(s).value for s in self.strategies))
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")
        if not self.strategies:
            raise ValueError("at least one strategy is required")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("duplicate strategy")

    def resolved(self) -> "ExperimentConfig":
        n = self.n_qubits
        vqc = self.vqc_depth if self.vqc_depth is not None else DEPTH_TABLE.get(n, 1)
        tgt = self.target_depth if self.target_depth is not None else vqc
        budget = self.budget if self.budget is not None else min(4**n, 32)
        return replace(self, vqc_depth=vqc, target_depth=tgt, budget=budget)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "strategies" in data:
            data["strategies"] = tuple(data["strategies"])
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["strategies"] = list(self.strategies)
        return d

    def al_config(self, repeat: int, init_seed: int, bootstrap_seed: int) -> ALConfig:
        return ALConfig(
            spec=AnsatzSpec(self.n_qubits, self.vqc_depth),
            budget=self.budget,
            bootstrap=self.bootstrap,
            committee_size=self.committee_size,
            schedule=TrainSchedule(self.lr, self.epochs, self.gradient),
            init_seed=init_seed,
            bootstrap_seed=bootstrap_seed,
            repeat=repeat,
            squared_qbc=self.squared_qbc,
            phase_invariant=self.phase_invariant,
            ensemble_refresh=self.ensemble_refresh,
            record_timing=self.record_timing,
        )


def repeat_seeds(base_seed: int, repeat: int) -> dict[str, int]:
    """Independent per-repeat seeds, a pure function of (base_seed, repeat)."""
    words = np.random.SeedSequence([base_seed, repeat]).generate_state(4, dtype=np.uint64)
    return dict(zip(("target", "bootstrap", "init", "strategy"), (int(w) for w in words)))


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[RunRecord]
    summary: dict[str, Any] = field(default_factory=dict)


def _run_job(config: ExperimentConfig, kind: str, repeat: int) -> list[RunRecord]:
    seeds = repeat_seeds(config.base_seed, repeat)
    oracle = generate_target(TargetSpec(config.n_qubits, config.target_depth, seeds["target"]))
    pool = generate_pool(config.n_qubits, config.pool_mode)
    al_cfg = config.al_config(repeat, seeds["init"], seeds["bootstrap"])
    return al_run(Strategy(kind, seeds["strategy"]), oracle, pool, al_cfg)


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Run every (strategy, repeat) pair and summarise.

    Within a repeat all strategies see the same target, the same bootstrap
    labels and the same initial parameters.  Output order is
    (strategy, repeat, step) whatever the scheduling.
    """
    config = config.resolved()
    jobs = [(kind, r) for kind in config.strategies for r in range(config.repeats)]
    results: dict[tuple[str, int], list[RunRecord]] = {}

    def fail(kind, r, exc):
        raise ExperimentError(f"{kind} repeat {r} failed: {exc!r}") from exc

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            futures = {job: pool.submit(_run_job, config, *job) for job in jobs}
            for job, fut in futures.items():
                try:
                    results[job] = fut.result()
                except Exception as exc:
                    fail(*job, exc)
    else:
        for job in jobs:
            try:
                results[job] = _run_job(config, *job)
            except Exception as exc:
                fail(*job, exc)
            log.debug("finished %s repeat %d", *job)

    records = [rec for job in jobs for rec in results[job]]
    return ExperimentResult(config, records, summarize(records, config.strategies))


def summarize(records: Iterable[RunRecord], strategies: Iterable[str]) -> dict[str, Any]:
    """Mean and standard deviation per (strategy, labels_used), plus improvement over RAND."""
    grouped: dict[str, dict[int, list[RunRecord]]] = {}
    for rec in records:
        grouped.setdefault(rec.strategy, {}).setdefault(rec.labels_used, []).append(rec)

    def stats(rows):
        sim = np.array([r.similarity for r in rows])
        aligned = np.array([r.similarity_phase_aligned for r in rows])
        losses = np.array([r.loss for r in rows])
        return {
            "n": len(rows),
            "mean_similarity": float(sim.mean()),
            "std_similarity": float(sim.std()),
            "mean_similarity_phase_aligned": float(aligned.mean()),
            "std_similarity_phase_aligned": float(aligned.std()),
            "mean_loss": float(losses.mean()),
        }

    table = {
        s: {labels: stats(rows) for labels, rows in sorted(grouped.get(s, {}).items())}
        for s in strategies
    }
    rand = table.get(StrategyKind.RAND.value)
    out: dict[str, Any] = {}
    for s, by_labels in table.items():
        rows = []
        for labels, st in by_labels.items():
            if rand is not None and labels in rand:
                try:
                    st["improvement"] = improvement(
                        st["mean_similarity"], rand[labels]["mean_similarity"]
                    )
                except UndefinedRatioError:
                    st["improvement"] = None
            rows.append({"labels_used": labels, **st})
        out[s] = rows
    return {"strategies": out}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def records_to_csv(records: Iterable[RunRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow([_fmt(getattr(rec, col)) for col in CSV_HEADER])
    return buf.getvalue()


def read_records(path: str | Path) -> list[RunRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [
            RunRecord(
                strategy=row["strategy"],
                repeat=int(row["repeat"]),
                step=int(row["step"]),
                labels_used=int(row["labels_used"]),
                loss=float(row["loss"]),
                similarity=float(row["similarity"]),
                similarity_phase_aligned=float(row["similarity_phase_aligned"]),
                wall_time_s=float(row["wall_time_s"]) if row["wall_time_s"] else None,
            )
            for row in reader
        ]


def write_outputs(result: ExperimentResult, out_dir: str | Path) -> Path:
    """Write records.csv, summary.json and config.echo.json into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "records.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(result.records))
    (out / "summary.json").write_text(
        json.dumps(result.summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out / "config.echo.json").write_text(
        json.dumps(result.config.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return out
