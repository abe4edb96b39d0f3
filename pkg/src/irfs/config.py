"""Run configuration for the exploration loop."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

TRAINER_MODES = ("none", "kbest", "dtree", "hybrid")
REWARD_SCHEMES = ("equal", "prs1", "prs2")
DESCRIPTOR_DIM = 8


@dataclass
class ExplorationConfig:
    steps: int
    transfer_point: int | None = None  # hybrid phase length; defaults to steps // 4
    gamma: float = 0.9
    exploit_prob: float = 0.9
    lr: float = 0.01
    batch_size: int = 16
    hidden: int = 128
    memory_capacity: int = 2000
    lam: float = 0.5
    beta: float = 0.1
    state_method: int = 1
    reward_scheme: str = "equal"
    trainer_mode: str = "none"
    descriptor_dim: int = DESCRIPTOR_DIM
    seed: int = 0
    hybrid_order: tuple[str, str] = ("kbest", "dtree")
    equal_full_share: bool = False
    mi_bins: int = 10
    plot: bool = field(default=False, compare=False)

    @property
    def resolved_transfer_point(self) -> int:
        if self.transfer_point is not None:
            return self.transfer_point
        return max(1, self.steps // 4)

    def validate(self):
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.resolved_transfer_point < 1:
            raise ValueError("transfer_point must be >= 1")
        for name in ("gamma", "exploit_prob", "lam"):
            value = getattr(self, name)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.gamma >= 1.0:
            raise ValueError("gamma must be < 1")
        if self.beta < 0.0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.lr <= 0.0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.batch_size < 1 or self.hidden < 1 or self.memory_capacity < 1:
            raise ValueError("batch_size, hidden, memory_capacity must be >= 1")
        if self.state_method not in (1, 2):
            raise ValueError(f"state_method must be 1 or 2, got {self.state_method}")
        if self.reward_scheme not in REWARD_SCHEMES:
            raise ValueError(f"unknown reward scheme {self.reward_scheme!r}")
        if self.trainer_mode not in TRAINER_MODES:
            raise ValueError(f"unknown trainer mode {self.trainer_mode!r}")
        if self.descriptor_dim != DESCRIPTOR_DIM:
            raise ValueError(f"descriptor_dim is fixed at {DESCRIPTOR_DIM}")
        if sorted(self.hybrid_order) != ["dtree", "kbest"]:
            raise ValueError("hybrid_order must name kbest and dtree exactly once")
        if self.mi_bins < 2:
            raise ValueError("mi_bins must be >= 2")
        if self.trainer_mode == "hybrid" and 2 * self.resolved_transfer_point > self.steps:
            warnings.warn(
                "hybrid schedule never reaches the self-exploration phase "
                f"(2*{self.resolved_transfer_point} > {self.steps} steps)",
                stacklevel=2,
            )
