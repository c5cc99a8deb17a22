"""Adam optimiser state and update step (bias-corrected moments)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[np.ndarray] = field(default_factory=list)
    v: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: list[np.ndarray], lr: float = 0.001,
                   beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(lr=lr, beta1=beta1, beta2=beta2, eps=eps, step=0,
                   m=[np.zeros_like(p) for p in params],
                   v=[np.zeros_like(p) for p in params])


def adam_step(adam: AdamState, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
    """One in-place Adam update of ``params`` given matching ``grads``."""
    if len(params) != len(adam.m) or len(grads) != len(params):
        raise ValueError("parameter/gradient count does not match optimiser state")
    for p, g, m in zip(params, grads, adam.m):
        if p.shape != g.shape or p.shape != m.shape:
            raise ValueError("parameter/gradient shape mismatch")
    adam.step += 1
    t = adam.step
    bc1 = 1.0 - adam.beta1 ** t
    bc2 = 1.0 - adam.beta2 ** t
    for p, g, m, v in zip(params, grads, adam.m, adam.v):
        m *= adam.beta1
        m += (1.0 - adam.beta1) * g
        v *= adam.beta2
        v += (1.0 - adam.beta2) * g * g
        p -= adam.lr * (m / bc1) / (np.sqrt(v / bc2) + adam.eps)
