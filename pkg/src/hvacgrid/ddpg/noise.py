"""Ornstein-Uhlenbeck exploration noise (Euler-Maruyama discretisation)."""

from __future__ import annotations

import numpy as np


class OuNoise:
    """Mean-reverting noise; ``scale`` is the exploration magnitude applied to
    the returned sample (the internal state itself is unscaled)."""

    def __init__(self, dim: int, mu: float = 0.0, theta: float = 0.15,
                 sigma: float = 0.2, scale: float = 0.35):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        if scale < 0:
            raise ValueError("scale must be >= 0")
        self.dim = dim
        self.mu = mu
        self.theta = theta
        self.sigma = sigma
        self.scale = scale
        self.state = np.full(dim, float(mu))

    def reset(self) -> None:
        self.state = np.full(self.dim, float(self.mu))

    def sample(self, dt: float, rng: np.random.Generator) -> np.ndarray:
        """Advance the process by dt and return the scaled noise vector."""
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.state = (self.state
                      + self.theta * (self.mu - self.state) * dt
                      + self.sigma * np.sqrt(dt) * rng.standard_normal(self.dim))
        return self.scale * self.state.copy()
