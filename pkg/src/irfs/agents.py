"""Per-feature selection agents: a tiny two-layer Q-network each, with
epsilon-greedy action choice, ring-buffer experience replay, and one-step
Bellman targets trained by Adam.

Action 0 deselects the agent's feature, action 1 selects it. There is no
separate target network and no terminal state; the task is continuing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray


class ReplayBuffer:
    """Fixed-capacity ring buffer; the oldest entry is evicted first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._pos = 0

    def __len__(self) -> int:
        return len(self._items)

    def append(self, item: Transition):
        if len(self._items) < self.capacity:
            self._items.append(item)
        else:
            self._items[self._pos] = item
        self._pos = (self._pos + 1) % self.capacity

    def __getitem__(self, idx: int) -> Transition:
        return self._items[idx]


class AgentPolicy:
    """Q-network (state_dim -> hidden ReLU -> 2) plus Adam state and replay."""

    def __init__(self, state_dim: int, hidden: int, capacity: int, rng: np.random.Generator):
        self.state_dim = state_dim
        self.hidden = hidden
        self.rng = rng
        self.replay = ReplayBuffer(capacity)
        b1 = 1.0 / np.sqrt(state_dim)
        b2 = 1.0 / np.sqrt(hidden)
        self.params = {
            "w1": rng.uniform(-b1, b1, size=(state_dim, hidden)),
            "b1": rng.uniform(-b1, b1, size=hidden),
            "w2": rng.uniform(-b2, b2, size=(hidden, 2)),
            "b2": rng.uniform(-b2, b2, size=2),
        }
        self.adam_m = {k: np.zeros_like(v) for k, v in self.params.items()}
        self.adam_v = {k: np.zeros_like(v) for k, v in self.params.items()}
        self.adam_t = 0

    def q_values(self, states: np.ndarray) -> np.ndarray:
        """Forward pass; accepts a single state or a batch."""
        squeeze = states.ndim == 1
        s = np.atleast_2d(states)
        if s.shape[1] != self.state_dim:
            raise ValueError(f"state dimension mismatch: expected {self.state_dim}, got {s.shape[1]}")
        z1 = s @ self.params["w1"] + self.params["b1"]
        h = np.maximum(z1, 0.0)
        q = h @ self.params["w2"] + self.params["b2"]
        return q[0] if squeeze else q


def init_agents(n_agents: int, config) -> list[AgentPolicy]:
    """One agent per feature, each with its own (run_seed, index) random stream."""
    if n_agents < 1:
        raise ValueError(f"need at least 1 agent, got {n_agents}")
    return [
        AgentPolicy(
            state_dim=config.descriptor_dim,
            hidden=config.hidden,
            capacity=config.memory_capacity,
            rng=np.random.default_rng([config.seed, i]),
        )
        for i in range(n_agents)
    ]


def act(agent: AgentPolicy, state: np.ndarray, exploit_prob: float) -> int:
    """Greedy action with probability exploit_prob, else a uniform coin flip.

    A Q-value tie resolves to select (action 1).
    """
    if not (0.0 <= exploit_prob <= 1.0):
        raise ValueError(f"exploit_prob must be in [0, 1], got {exploit_prob}")
    if agent.rng.random() < exploit_prob:
        q = agent.q_values(np.asarray(state, dtype=np.float64))
        return 1 if q[1] >= q[0] else 0
    return int(agent.rng.integers(0, 2))


def store(agent: AgentPolicy, transition: Transition):
    if (
        transition.state.shape != (agent.state_dim,)
        or transition.next_state.shape != (agent.state_dim,)
    ):
        raise ValueError("transition state dimension mismatch")
    agent.replay.append(transition)


def sample_batch(agent: AgentPolicy, batch_size: int) -> list[Transition]:
    """Uniform sample with replacement from the agent's replay."""
    if len(agent.replay) == 0:
        raise ValueError("replay is empty")
    idx = agent.rng.integers(0, len(agent.replay), size=batch_size)
    return [agent.replay[int(i)] for i in idx]


def train_step(agent: AgentPolicy, batch: list[Transition], gamma: float, lr: float) -> float:
    """One MSE/Adam update toward y = r + gamma * max_a Q(s', a).

    Targets come from the agent's current network and carry no gradient.
    Returns the scalar loss before the update.
    """
    if not batch:
        raise ValueError("empty batch")
    if not (0.0 <= gamma < 1.0):
        raise ValueError(f"gamma must be in [0, 1), got {gamma}")
    states = np.stack([t.state for t in batch])
    next_states = np.stack([t.next_state for t in batch])
    actions = np.array([t.action for t in batch], dtype=np.int64)
    rewards = np.array([t.reward for t in batch], dtype=np.float64)
    n = len(batch)

    w1, b1 = agent.params["w1"], agent.params["b1"]
    w2, b2 = agent.params["w2"], agent.params["b2"]
    z1 = states @ w1 + b1
    h = np.maximum(z1, 0.0)
    q = h @ w2 + b2

    q_next = agent.q_values(next_states)
    targets = rewards + gamma * q_next.max(axis=1)

    rows = np.arange(n)
    diff = q[rows, actions] - targets
    loss = float(np.mean(diff * diff))

    dq = np.zeros_like(q)
    dq[rows, actions] = 2.0 * diff / n
    grads = {
        "w2": h.T @ dq,
        "b2": dq.sum(axis=0),
    }
    dh = dq @ w2.T
    dz1 = dh * (z1 > 0.0)
    grads["w1"] = states.T @ dz1
    grads["b1"] = dz1.sum(axis=0)

    agent.adam_t += 1
    t = agent.adam_t
    for key, g in grads.items():
        m = agent.adam_m[key]
        v = agent.adam_v[key]
        m *= ADAM_BETA1
        m += (1.0 - ADAM_BETA1) * g
        v *= ADAM_BETA2
        v += (1.0 - ADAM_BETA2) * g * g
        m_hat = m / (1.0 - ADAM_BETA1**t)
        v_hat = v / (1.0 - ADAM_BETA2**t)
        agent.params[key] -= lr * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
    return loss


def loss_and_grads(agent: AgentPolicy, batch: list[Transition], gamma: float):
    """Loss and analytic parameter gradients without updating (for checks)."""
    states = np.stack([t.state for t in batch])
    next_states = np.stack([t.next_state for t in batch])
    actions = np.array([t.action for t in batch], dtype=np.int64)
    rewards = np.array([t.reward for t in batch], dtype=np.float64)
    n = len(batch)

    w2 = agent.params["w2"]
    z1 = states @ agent.params["w1"] + agent.params["b1"]
    h = np.maximum(z1, 0.0)
    q = h @ w2 + agent.params["b2"]
    targets = rewards + gamma * agent.q_values(next_states).max(axis=1)
    rows = np.arange(n)
    diff = q[rows, actions] - targets
    loss = float(np.mean(diff * diff))

    dq = np.zeros_like(q)
    dq[rows, actions] = 2.0 * diff / n
    dh = dq @ w2.T
    dz1 = dh * (z1 > 0.0)
    grads = {
        "w1": states.T @ dz1,
        "b1": dz1.sum(axis=0),
        "w2": h.T @ dq,
        "b2": dq.sum(axis=0),
    }
    return loss, grads


def save_weights(agent: AgentPolicy, directory) -> Path:
    """Checkpoint: one little-endian float64 .bin per layer + a shape manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for name, arr in agent.params.items():
        fname = f"{name}.bin"
        (directory / fname).write_bytes(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        manifest[name] = {"file": fname, "shape": list(arr.shape)}
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return path


def load_weights(agent: AgentPolicy, directory):
    """Restore layer arrays written by save_weights; shapes must match."""
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text())
    for name, meta in manifest.items():
        raw = (directory / meta["file"]).read_bytes()
        arr = np.frombuffer(raw, dtype="<f8").reshape(meta["shape"]).astype(np.float64)
        if agent.params[name].shape != arr.shape:
            raise ValueError(f"checkpoint shape mismatch for {name}")
        agent.params[name] = arr
