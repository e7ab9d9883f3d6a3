from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .tensor import Tensor


def _require_grad(p: Tensor) -> np.ndarray:
    if p.grad is None:
        raise ValueError(f"missing gradient for parameter {p.name or p.shape}")
    return p.grad


def sgd_step(params: Sequence[Tensor], lr: float) -> None:
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    for p in params:
        p.data -= lr * _require_grad(p)


@dataclass
class AdamState:
    step: int = 0
    m: dict[int, np.ndarray] = field(default_factory=dict)
    v: dict[int, np.ndarray] = field(default_factory=dict)


def adam_step(
    params: Sequence[Tensor],
    state: AdamState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Bias-corrected Adam update; moments are keyed by position in ``params``."""
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    grads = [_require_grad(p) for p in params]
    state.step += 1
    c1 = 1.0 - beta1**state.step
    c2 = 1.0 - beta2**state.step
    for k, (p, g) in enumerate(zip(params, grads)):
        m = state.m.get(k)
        if m is None:
            m = state.m[k] = np.zeros_like(p.data)
            state.v[k] = np.zeros_like(p.data)
        v = state.v[k]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)


def zero_grads(params: Sequence[Tensor]) -> None:
    for p in params:
        p.grad = None
