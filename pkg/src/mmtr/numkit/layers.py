"""Dense, LSTM and additive-attention kernels with their parameter sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as tk
from ._kernels import lstm_backward, lstm_forward
from .rng import Rng
from .tensor import Tensor, _make, as_tensor


def glorot(rng: Rng, fan_out: int, fan_in: int) -> np.ndarray:
    a = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-a, a, (fan_out, fan_in))


@dataclass
class DenseParams:
    weight: Tensor  # (out, in)
    bias: Tensor  # (out,)

    @classmethod
    def init(cls, rng: Rng, d_in: int, d_out: int, name: str = "dense") -> "DenseParams":
        return cls(
            tk.parameter(glorot(rng, d_out, d_in), f"{name}.weight"),
            tk.parameter(np.zeros(d_out), f"{name}.bias"),
        )

    @property
    def d_in(self) -> int:
        return self.weight.shape[1]

    @property
    def d_out(self) -> int:
        return self.weight.shape[0]

    def tensors(self) -> dict[str, Tensor]:
        return {"weight": self.weight, "bias": self.bias}

    def __call__(self, x: Tensor) -> Tensor:
        return dense(x, self)


def dense(x: Tensor, p: DenseParams) -> Tensor:
    if x.shape[-1] != p.d_in:
        raise ValueError(f"dense expects input width {p.d_in}, got {x.shape}")
    return tk.add(tk.matmul(x, tk.transpose(p.weight)) if x.data.ndim == 2 else tk.matvec(p.weight, x), p.bias)


@dataclass
class LstmParams:
    """Gates are stacked in the order input, forget, output, cell-candidate."""

    w_x: Tensor  # (4h, d_in)
    w_h: Tensor  # (4h, h)
    bias: Tensor  # (4h,)

    @classmethod
    def init(cls, rng: Rng, d_in: int, d_h: int, name: str = "lstm") -> "LstmParams":
        w_x = np.concatenate([glorot(rng, d_h, d_in) for _ in range(4)])
        w_h = np.concatenate([glorot(rng, d_h, d_h) for _ in range(4)])
        bias = np.zeros(4 * d_h)
        bias[d_h : 2 * d_h] = 1.0  # forget gate
        return cls(
            tk.parameter(w_x, f"{name}.w_x"),
            tk.parameter(w_h, f"{name}.w_h"),
            tk.parameter(bias, f"{name}.bias"),
        )

    @property
    def d_in(self) -> int:
        return self.w_x.shape[1]

    @property
    def d_h(self) -> int:
        return self.w_h.shape[1]

    def tensors(self) -> dict[str, Tensor]:
        return {"w_x": self.w_x, "w_h": self.w_h, "bias": self.bias}


def lstm_sequence(inputs: Tensor, params: LstmParams, init: tuple | None = None) -> Tensor:
    """Run the LSTM over ``inputs`` (T x d_in) and return all hidden states (T x d_h).

    The whole sequence is one graph node; its backward pass is hand-written
    backpropagation through time.
    """
    inputs = as_tensor(inputs)
    if inputs.data.ndim != 2 or inputs.shape[0] == 0:
        raise ValueError("lstm_sequence needs a non-empty T x d_in sequence")
    if inputs.shape[1] != params.d_in:
        raise ValueError(f"lstm expects input width {params.d_in}, got {inputs.shape[1]}")
    n_h = params.d_h
    if init is None:
        h0, c0 = tk.Tensor(np.zeros(n_h)), tk.Tensor(np.zeros(n_h))
    else:
        h0, c0 = as_tensor(init[0]), as_tensor(init[1])

    x = inputs.data
    w_x, w_h = params.w_x.data, params.w_h.data
    pre = x @ w_x.T + params.bias.data
    gates, cells, hidden = lstm_forward(pre, w_h, h0.data, c0.data)

    def fn(g_out):
        d_pre, dh0, dc0 = lstm_backward(np.ascontiguousarray(g_out), gates, cells, w_h)
        return (d_pre @ w_x, d_pre.T @ x, d_pre.T @ hidden[:-1], d_pre.sum(axis=0), dh0, dc0)

    return _make(hidden[1:].copy(), (inputs, params.w_x, params.w_h, params.bias, h0, c0), fn)


@dataclass
class AttentionParams:
    """Additive scoring: ``score_t = v . tanh(W h_t)``."""

    w: Tensor  # (d_h, d_h)
    v: Tensor  # (d_h,)

    @classmethod
    def init(cls, rng: Rng, d_h: int, name: str = "attn") -> "AttentionParams":
        a = np.sqrt(6.0 / (d_h + 1))
        return cls(
            tk.parameter(glorot(rng, d_h, d_h), f"{name}.w"),
            tk.parameter(rng.uniform(-a, a, (d_h,)), f"{name}.v"),
        )

    def tensors(self) -> dict[str, Tensor]:
        return {"w": self.w, "v": self.v}


def attention(hidden: Tensor, params: AttentionParams) -> tuple[Tensor, Tensor]:
    """Return (context vector, attention weights) over the rows of ``hidden``."""
    if hidden.data.ndim != 2 or hidden.shape[0] == 0:
        raise ValueError("attention needs a non-empty T x d_h sequence")
    proj = tk.tanh(tk.matmul(hidden, tk.transpose(params.w)))
    scores = tk.matvec(proj, params.v)
    weights = tk.softmax(scores)
    context = tk.matmul(weights, hidden)
    return context, weights
