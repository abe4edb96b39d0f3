"""Interactive reinforced feature selection.

A feature-selection search where one small DQN agent per feature decides
select/deselect each step, external trainers (KBest, decision tree, or a
hybrid schedule of both) flip hesitant deselections, a tree-augmented
correlation-graph convolution encodes the selected subset as the state, and
personalized reward schemes split the downstream accuracy signal.
"""

from .config import ExplorationConfig
from .dataio import Dataset, DataError, from_arrays, load_csv, split
from .harness import (
    RunResult,
    StepRecord,
    ave_acc,
    baseline_dt_rfe,
    baseline_kbest,
    baseline_mrmr,
    best_acc,
    report,
    run_exploration,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "DataError",
    "ExplorationConfig",
    "RunResult",
    "StepRecord",
    "ave_acc",
    "baseline_dt_rfe",
    "baseline_kbest",
    "baseline_mrmr",
    "best_acc",
    "from_arrays",
    "load_csv",
    "report",
    "run_exploration",
    "split",
]
