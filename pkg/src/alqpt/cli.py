"""Command line entry point: ``alqpt run | sweep | verify``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .harness import ExperimentConfig, run_experiment, write_outputs


def _qubit_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(q) for q in text.split(",")]


def _print_summary(result) -> None:
    for strategy, rows in result.summary["strategies"].items():
        last = rows[-1]
        print(
            f"{strategy:5s} labels={last['labels_used']:4d} "
            f"similarity={last['mean_similarity']:.4f}+-{last['std_similarity']:.4f} "
            f"aligned={last['mean_similarity_phase_aligned']:.4f}"
        )


def _execute(config: ExperimentConfig, out: Path) -> None:
    result = run_experiment(config)
    write_outputs(result, out)
    _print_summary(result)
    print(f"wrote {out}")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="alqpt", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a JSON config")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", type=Path)
    run.add_argument("--seed", type=int, help="override base_seed")

    sweep = sub.add_parser("sweep", help="default experiment for a range of qubit counts")
    sweep.add_argument("--qubits", default="2..4", help="e.g. 2..4 or 2,3,5")
    sweep.add_argument("--repeats", type=int)
    sweep.add_argument("--budget", type=int)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--out", type=Path, default=Path("results"))
    sweep.add_argument("--seed", type=int)

    verify = sub.add_parser("verify", help="run the quick invariant suite")
    verify.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)

    if args.command == "verify":
        from .verify import run_all

        return 0 if run_all(args.seed) else 1

    if args.command == "run":
        config = ExperimentConfig.from_file(args.config)
        if args.seed is not None:
            config = replace(config, base_seed=args.seed)
        out = args.out or Path(config.output or "results")
        _execute(config, out)
        return 0

    for n in _qubit_range(args.qubits):
        overrides = {"n_qubits": n, "workers": args.workers}
        if args.repeats is not None:
            overrides["repeats"] = args.repeats
        if args.budget is not None:
            overrides["budget"] = args.budget
        if args.seed is not None:
            overrides["base_seed"] = args.seed
        _execute(ExperimentConfig(**overrides), args.out / f"n{n}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
