"""Fusion layers and the two-unit sigmoid head."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import expit

from .. import numkit as nk
from ..corpus.model import Label
from ..numkit import DenseParams, Rng, Tensor, glorot


def _vec(x) -> Tensor:
    return x.values if hasattr(x, "values") else nk.Tensor(x) if not isinstance(x, Tensor) else x


@dataclass
class GmuParams:
    """Three-way gated unit: branch maps ``w`` (d_f x d_s) and gate maps ``y`` (d_f x 3 d_s)."""

    w: list[Tensor]
    y: list[Tensor]

    @classmethod
    def init(cls, rng: Rng, d_s: int, d_f: int) -> "GmuParams":
        w = [nk.parameter(glorot(rng, d_f, d_s), f"gmu.w{i + 1}") for i in range(3)]
        y = [nk.parameter(glorot(rng, d_f, 3 * d_s), f"gmu.y{i + 1}") for i in range(3)]
        return cls(w, y)

    def tensors(self) -> dict[str, Tensor]:
        out = {f"w{i + 1}": t for i, t in enumerate(self.w)}
        out.update({f"y{i + 1}": t for i, t in enumerate(self.y)})
        return out


def gmu_trimodal(x1, x2, x3, p: GmuParams) -> tuple[Tensor, list[Tensor]]:
    """h = sum_i z_i * tanh(W_i x_i) with z_i = sigmoid(Y_i [x1, x2, x3]); returns (h, [z1, z2, z3])."""
    xs = [_vec(x1), _vec(x2), _vec(x3)]
    d_s = p.w[0].shape[1]
    for x in xs:
        if x.shape != (d_s,):
            raise ValueError(f"GMU expects stream vectors of width {d_s}, got {x.shape}")
    joint = nk.concat(xs)
    branches = [nk.tanh(nk.matvec(w, x)) for w, x in zip(p.w, xs)]
    gates = [nk.sigmoid(nk.matvec(y, joint)) for y in p.y]
    h = nk.mul(gates[0], branches[0])
    for z, b in zip(gates[1:], branches[1:]):
        h = nk.add(h, nk.mul(z, b))
    return h, gates


@dataclass
class BimodalGmuParams:
    """Two-way gated unit with a single gate ``z`` and its complement."""

    w: list[Tensor]
    y: Tensor

    @classmethod
    def init(cls, rng: Rng, d_s: int, d_f: int) -> "BimodalGmuParams":
        w = [nk.parameter(glorot(rng, d_f, d_s), f"gmu.w{i + 1}") for i in range(2)]
        return cls(w, nk.parameter(glorot(rng, d_f, 2 * d_s), "gmu.y"))

    def tensors(self) -> dict[str, Tensor]:
        return {"w1": self.w[0], "w2": self.w[1], "y": self.y}


def gmu_bimodal(x1, x2, p: BimodalGmuParams) -> tuple[Tensor, list[Tensor]]:
    """h = z * tanh(W1 x1) + (1 - z) * tanh(W2 x2), z = sigmoid(Y [x1, x2]); returns (h, [z, 1 - z])."""
    a, b = _vec(x1), _vec(x2)
    d_s = p.w[0].shape[1]
    if a.shape != (d_s,) or b.shape != (d_s,):
        raise ValueError(f"GMU expects stream vectors of width {d_s}")
    z = nk.sigmoid(nk.matvec(p.y, nk.concat([a, b])))
    h1 = nk.tanh(nk.matvec(p.w[0], a))
    h2 = nk.tanh(nk.matvec(p.w[1], b))
    # h2 + z * (h1 - h2) keeps the convex combination exact when h1 == h2
    h = nk.add(h2, nk.mul(z, nk.sub(h1, h2)))
    return h, [z, nk.sub(1.0, z)]


def concat_fuse(xs: Sequence, p: DenseParams) -> Tensor:
    """Concatenate stream vectors (text, audio, video order) -> dense -> tanh."""
    if len(xs) < 2:
        raise ValueError("feature concatenation needs at least two stream vectors")
    return nk.tanh(nk.dense(nk.concat([_vec(x) for x in xs]), p))


def head_logits(h, p: DenseParams) -> Tensor:
    if p.d_out != 2:
        raise ValueError("the classifier head must have exactly two outputs")
    return nk.dense(_vec(h), p)


def head(h, p: DenseParams) -> np.ndarray:
    """Two sigmoid scores; index 0 is Green, index 1 is Red."""
    return expit(head_logits(h, p).data)


def predict_label(scores) -> Label:
    """Argmax over the two scores; ties go to Green, the a-priori majority."""
    s = np.asarray(scores)
    return Label.RED if s[1] > s[0] else Label.GREEN


def late_logits(per_stream: Sequence[Tensor]) -> Tensor:
    if not per_stream:
        raise ValueError("late fusion needs at least one logit pair")
    total = per_stream[0]
    for lg in per_stream[1:]:
        total = nk.add(total, lg)
    return nk.mul(total, 1.0 / len(per_stream))


def mean_logits(per_stream_logits: Sequence) -> np.ndarray:
    """Correctly rounded mean of logit pairs: independent of list order, exact for identical copies."""
    if len(per_stream_logits) == 0:
        raise ValueError("late fusion needs at least one logit pair")
    arr = [np.asarray(getattr(lg, "data", lg), dtype=np.float64) for lg in per_stream_logits]
    if any(a.shape != (2,) for a in arr):
        raise ValueError("late fusion expects logit pairs")
    k = len(arr)
    return np.array([float(sum(Fraction(float(a[j])) for a in arr) / k) for j in range(2)])


def late_fuse(per_stream_logits: Sequence) -> np.ndarray:
    """Mean of pre-sigmoid logit pairs, then sigmoid."""
    return expit(mean_logits(per_stream_logits))
