"""Numeric substrate: tensors, autodiff, recurrent/attention kernels, optimizers, PRNG."""

from .gradcheck import GradCheckReport, grad_check
from .layers import AttentionParams, DenseParams, LstmParams, attention, dense, glorot, lstm_sequence
from .optim import AdamState, adam_step, sgd_step, zero_grads
from .rng import Rng, derive_seed
from .tensor import (
    Tensor,
    add,
    backward,
    bce_with_logits,
    check_finite,
    concat,
    exp,
    index,
    log,
    matmul,
    matvec,
    mean,
    mul,
    no_grad,
    parameter,
    sigmoid,
    softmax,
    softmax_cross_entropy,
    stack,
    sub,
    sum,
    take_rows,
    tanh,
    transpose,
)

__all__ = [
    "AdamState",
    "AttentionParams",
    "DenseParams",
    "GradCheckReport",
    "LstmParams",
    "Rng",
    "Tensor",
    "adam_step",
    "add",
    "attention",
    "backward",
    "bce_with_logits",
    "check_finite",
    "concat",
    "dense",
    "derive_seed",
    "exp",
    "glorot",
    "grad_check",
    "index",
    "log",
    "lstm_sequence",
    "matmul",
    "matvec",
    "mean",
    "mul",
    "no_grad",
    "parameter",
    "sgd_step",
    "sigmoid",
    "softmax",
    "softmax_cross_entropy",
    "stack",
    "sub",
    "sum",
    "take_rows",
    "tanh",
    "transpose",
    "zero_grads",
]
