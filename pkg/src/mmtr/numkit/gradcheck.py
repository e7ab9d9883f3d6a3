"""Central finite-difference verification of analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .rng import Rng
from .tensor import Tensor

# |analytic - numeric| / max(|analytic| + |numeric|, REL_FLOOR)
REL_FLOOR = 1e-7


@dataclass
class GradCheckReport:
    tolerance: float
    max_rel_error: dict[str, float] = field(default_factory=dict)
    checked: dict[str, int] = field(default_factory=dict)

    @property
    def failures(self) -> list[str]:
        return [k for k, e in self.max_rel_error.items() if not e < self.tolerance]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def worst(self) -> float:
        return max(self.max_rel_error.values(), default=0.0)

    def summary(self) -> str:
        lines = [f"{k}: max rel err {e:.3e} over {self.checked[k]} elements" for k, e in self.max_rel_error.items()]
        return "\n".join(lines)


def _pick(n: int, analytic: np.ndarray, budget: int, rng: Rng) -> np.ndarray:
    if n <= budget:
        return np.arange(n)
    nonzero = np.flatnonzero(analytic)
    half = budget // 2
    if len(nonzero) > half:
        nonzero = nonzero[rng.permutation(len(nonzero))[:half]]
    rest = np.setdiff1d(np.arange(n), nonzero)
    extra = rest[rng.permutation(len(rest))[: budget - len(nonzero)]]
    return np.sort(np.concatenate([nonzero, extra]))


def grad_check(
    closure: Callable[[], Tensor],
    params: Mapping[str, Tensor],
    tolerance: float = 1e-4,
    step: float = 1e-4,
    max_elements: int = 200,
    seed: int = 0,
    analytic: Mapping[str, np.ndarray] | None = None,
) -> GradCheckReport:
    """Compare backprop gradients of ``closure()`` against central differences.

    Tensors with more than ``max_elements`` entries are subsampled; half of
    the sample is drawn from entries with a nonzero analytic gradient so
    sparse gradients (embedding tables) are actually exercised. Passing
    ``analytic`` skips backprop and checks the given arrays instead.
    """
    rng = Rng(seed)
    if analytic is None:
        for p in params.values():
            p.grad = None
        closure().backward()
        analytic = {
            k: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data)) for k, p in params.items()
        }
    report = GradCheckReport(tolerance)
    for name, p in params.items():
        flat = p.data.reshape(-1)
        a_flat = np.asarray(analytic[name]).reshape(-1)
        worst = 0.0
        idx = _pick(flat.size, a_flat, max_elements, rng)
        for i in idx:
            orig = flat[i]
            flat[i] = orig + step
            up = closure().item()
            flat[i] = orig - step
            down = closure().item()
            flat[i] = orig
            numeric = (up - down) / (2.0 * step)
            err = abs(a_flat[i] - numeric) / max(abs(a_flat[i]) + abs(numeric), REL_FLOOR)
            worst = max(worst, err)
        report.max_rel_error[name] = worst
        report.checked[name] = len(idx)
    return report
