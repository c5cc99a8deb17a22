"""Fixed-capacity FIFO replay buffer with uniform mini-batch sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Experience:
    state: np.ndarray
    action: np.ndarray
    reward: float
    next_state: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.state, dtype=float)
        a = np.asarray(self.action, dtype=float)
        s2 = np.asarray(self.next_state, dtype=float)
        object.__setattr__(self, "state", s)
        object.__setattr__(self, "action", a)
        object.__setattr__(self, "next_state", s2)
        if s.shape != s2.shape:
            raise ValueError("state and next_state dimensions must match")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(a))
                and np.all(np.isfinite(s2)) and np.isfinite(self.reward)):
            raise ValueError("experience fields must be finite")


class ReplayBuffer:
    """Ring of the last ``capacity`` experiences; oldest evicted first."""

    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._states = np.zeros((capacity, state_dim))
        self._actions = np.zeros((capacity, action_dim))
        self._rewards = np.zeros(capacity)
        self._next_states = np.zeros((capacity, state_dim))
        self._cursor = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, exp: Experience) -> None:
        i = self._cursor
        self._states[i] = exp.state
        self._actions[i] = exp.action
        self._rewards[i] = exp.reward
        self._next_states[i] = exp.next_state
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, k: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
        """Uniform sample of ``k`` distinct stored transitions."""
        if k > self._size:
            raise ValueError(f"cannot sample {k} items from buffer of {self._size}")
        idx = rng.choice(self._size, size=k, replace=False)
        return {
            "states": self._states[idx].copy(),
            "actions": self._actions[idx].copy(),
            "rewards": self._rewards[idx].copy(),
            "next_states": self._next_states[idx].copy(),
        }

    def as_arrays(self) -> dict[str, np.ndarray]:
        """Stored contents in chronological order (oldest first)."""
        if self._size < self.capacity:
            order = np.arange(self._size)
        else:
            order = np.concatenate([np.arange(self._cursor, self.capacity),
                                    np.arange(self._cursor)])
        return {
            "states": self._states[order].copy(),
            "actions": self._actions[order].copy(),
            "rewards": self._rewards[order].copy(),
            "next_states": self._next_states[order].copy(),
        }
