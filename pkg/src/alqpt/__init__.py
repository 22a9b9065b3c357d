"""Active-learning selection of probe states for variational unitary process tomography."""
from .al import ALConfig, RunRecord, Strategy, StrategyKind, al_run
from .ansatz import AnsatzSpec, LabeledPair, TrainSchedule
from .harness import ExperimentConfig, run_experiment
from .metrics import improvement, phase_aligned_similarity, similarity
from .oracle import Oracle, TargetSpec, generate_target
from .probes import PoolMode, ProbePool, generate_pool
from .qcore import Circuit, Gate

__version__ = "0.1.0"
