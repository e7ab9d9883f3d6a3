"""Paired Student t-test with a self-contained t distribution CDF."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence


def _betacf(a: float, b: float, x: float, tol: float = 1e-10, max_iter: int = 500) -> float:
    # modified Lentz evaluation of the incomplete-beta continued fraction
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc_regularized(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x in (0.0, 1.0):
        return x
    log_front = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    return betainc_regularized(df / 2.0, 0.5, df / (df + t * t))


@dataclass(frozen=True)
class TTestResult:
    t: float
    p: float
    df: int
    mean_diff: float
    degenerate: bool = False  # zero-variance differences

    def to_dict(self) -> dict:
        t = self.t if math.isfinite(self.t) else ("inf" if self.t > 0 else "-inf")
        return {"t": t, "p": self.p, "df": self.df, "mean_diff": self.mean_diff, "degenerate": self.degenerate}

    @classmethod
    def from_dict(cls, d: dict) -> "TTestResult":
        return cls(float(d["t"]), d["p"], d["df"], d["mean_diff"], d["degenerate"])


def paired_ttest(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """t = mean(d) / (sd(d) / sqrt(k)) over d = a - b, two-sided p with k - 1 dof."""
    if len(a) != len(b):
        raise ValueError("paired t-test needs equal-length samples")
    k = len(a)
    if k < 2:
        raise ValueError("paired t-test needs at least two pairs")
    d = [x - y for x, y in zip(a, b)]
    mean = math.fsum(d) / k
    var = math.fsum((x - mean) ** 2 for x in d) / (k - 1)
    sd = math.sqrt(var)
    # differences equal to within rounding count as zero-variance
    if sd <= 1e-12 * max(1.0, abs(mean)):
        if all(x == 0 for x in d) or mean == 0:
            return TTestResult(0.0, 1.0, k - 1, mean, True)
        return TTestResult(math.copysign(math.inf, mean), 0.0, k - 1, mean, True)
    t = mean / (sd / math.sqrt(k))
    return TTestResult(t, t_two_sided_p(t, k - 1), k - 1, mean)
