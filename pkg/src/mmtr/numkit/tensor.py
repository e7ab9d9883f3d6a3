"""Dense float64 tensors with reverse-mode differentiation.

Every op records a closure that maps the output gradient to parent
gradients. ``backward`` walks the recorded graph in reverse topological
order; intermediate gradients live only for the duration of the walk while
leaf gradients accumulate on ``Tensor.grad``.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import expit

from ..errors import NumericError

_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    """Skip graph recording inside the block (inference only)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, name: str | None = None):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(())
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], Sequence[np.ndarray | None]] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"Tensor{label}(shape={self.shape})"

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return index(self, idx)

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def backward(self, grad: np.ndarray | None = None) -> None:
        backward(self, grad)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(data, name: str | None = None) -> Tensor:
    return Tensor(data, requires_grad=True, name=name)


def _needs_graph(parents: Iterable[Tensor]) -> bool:
    if not _GRAD_ENABLED:
        return False
    return any(p.requires_grad for p in parents)


def _make(data: np.ndarray, parents: tuple[Tensor, ...], fn) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.name = None
    if _needs_graph(parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = fn
    else:
        out.requires_grad = False
        out._parents = ()
        out._backward = None
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def backward(loss: Tensor, grad: np.ndarray | None = None) -> None:
    """Accumulate d(loss)/d(leaf) into every reachable leaf's ``grad``."""
    if grad is None:
        if loss.data.size != 1:
            raise ValueError(f"backward needs a scalar loss, got shape {loss.shape}")
        grad = np.ones_like(loss.data)
    if not loss.requires_grad:
        return

    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen and p.requires_grad:
                stack.append((p, False))

    grads: dict[int, np.ndarray] = {id(loss): np.asarray(grad, dtype=np.float64)}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            if node.grad is None:
                node.grad = np.array(g, dtype=np.float64, copy=True)
            else:
                node.grad += g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg


def check_finite(t: Tensor, what: str = "tensor") -> Tensor:
    if not np.all(np.isfinite(t.data)):
        raise NumericError(f"non-finite values in {what}")
    return t


# elementwise


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    sa, sb = a.shape, b.shape
    return _make(a.data + b.data, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)))


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    sa, sb = a.shape, b.shape
    return _make(a.data - b.data, (a, b), lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    ad, bd = a.data, b.data
    return _make(
        ad * bd,
        (a, b),
        lambda g: (_unbroadcast(g * bd, ad.shape), _unbroadcast(g * ad, bd.shape)),
    )


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    return _make(y, (x,), lambda g: (g * (1.0 - y * y),))


def sigmoid(x: Tensor) -> Tensor:
    y = expit(x.data)
    return _make(y, (x,), lambda g: (g * y * (1.0 - y),))


def exp(x: Tensor) -> Tensor:
    y = np.exp(x.data)
    return _make(y, (x,), lambda g: (g * y,))


def log(x: Tensor) -> Tensor:
    xd = x.data
    return _make(np.log(xd), (x,), lambda g: (g / xd,))


# reductions and reshaping


def sum(x: Tensor) -> Tensor:  # noqa: A001 - mirrors numpy naming
    shape = x.shape
    return _make(np.asarray(x.data.sum()), (x,), lambda g: (np.broadcast_to(g, shape).copy(),))


def mean(x: Tensor) -> Tensor:
    shape, n = x.shape, x.size
    return _make(np.asarray(x.data.mean()), (x,), lambda g: (np.full(shape, float(g) / n),))


def concat(xs: Sequence[Tensor]) -> Tensor:
    """Join 1-D tensors end to end."""
    xs = [as_tensor(x) for x in xs]
    sizes = [x.shape[0] for x in xs]
    bounds = np.cumsum([0] + sizes)

    def fn(g):
        return [g[bounds[i] : bounds[i + 1]] for i in range(len(xs))]

    return _make(np.concatenate([x.data for x in xs]), tuple(xs), fn)


def stack(xs: Sequence[Tensor]) -> Tensor:
    xs = [as_tensor(x) for x in xs]
    return _make(np.stack([x.data for x in xs]), tuple(xs), lambda g: list(g))


def index(x: Tensor, idx) -> Tensor:
    shape = x.shape

    def fn(g):
        out = np.zeros(shape)
        np.add.at(out, idx, g)
        return (out,)

    return _make(np.array(x.data[idx]), (x,), fn)


def take_rows(table: Tensor, rows: Sequence[int]) -> Tensor:
    """Gather rows of a 2-D table (embedding lookup)."""
    rows = np.asarray(rows, dtype=np.int64)
    shape = table.shape

    def fn(g):
        out = np.zeros(shape)
        np.add.at(out, rows, g)
        return (out,)

    return _make(table.data[rows], (table,), fn)


def transpose(x: Tensor) -> Tensor:
    return _make(x.data.T, (x,), lambda g: (g.T,))


# products


def matvec(w: Tensor, x: Tensor) -> Tensor:
    """Matrix-vector product ``W @ x``."""
    w, x = as_tensor(w), as_tensor(x)
    if w.data.ndim != 2 or x.data.ndim != 1 or w.shape[1] != x.shape[0]:
        raise ValueError(f"matvec dimension mismatch: {w.shape} @ {x.shape}")
    wd, xd = w.data, x.data
    return _make(wd @ xd, (w, x), lambda g: (np.outer(g, xd), wd.T @ g))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Product of 1-D/2-D operands with numpy's ``@`` semantics."""
    a, b = as_tensor(a), as_tensor(b)
    ad, bd = a.data, b.data
    if ad.ndim == 2 and bd.ndim == 1:
        return matvec(a, b)
    if ad.shape[-1] != bd.shape[0]:
        raise ValueError(f"matmul dimension mismatch: {a.shape} @ {b.shape}")
    if ad.ndim == 2 and bd.ndim == 2:
        return _make(ad @ bd, (a, b), lambda g: (g @ bd.T, ad.T @ g))
    if ad.ndim == 1 and bd.ndim == 2:
        return _make(ad @ bd, (a, b), lambda g: (bd @ g, np.outer(ad, g)))
    if ad.ndim == 1 and bd.ndim == 1:
        return _make(np.asarray(ad @ bd), (a, b), lambda g: (g * bd, g * ad))
    raise ValueError(f"matmul supports 1-D and 2-D operands, got {a.shape} and {b.shape}")


# normalizations and losses


def softmax(x: Tensor) -> Tensor:
    z = x.data - x.data.max()
    e = np.exp(z)
    y = e / e.sum()

    def fn(g):
        return (y * (g - np.dot(g, y)),)

    return _make(y, (x,), fn)


def bce_with_logits(logits: Tensor, target, weight=None) -> Tensor:
    """Mean over units of binary cross-entropy on sigmoid(logits)."""
    t = np.asarray(target, dtype=np.float64)
    z = logits.data
    w = np.ones_like(z) if weight is None else np.broadcast_to(np.asarray(weight, dtype=np.float64), z.shape)
    # log(1 + exp(-|z|)) form avoids overflow
    losses = np.maximum(z, 0.0) - z * t + np.log1p(np.exp(-np.abs(z)))
    n = z.size
    value = float((w * losses).sum() / n)

    def fn(g):
        return (float(g) * w * (expit(z) - t) / n,)

    return _make(np.asarray(value), (logits,), fn)


def softmax_cross_entropy(logits: Tensor, target_index: int, weight: float = 1.0) -> Tensor:
    z = logits.data - logits.data.max()
    lse = np.log(np.exp(z).sum())
    p = np.exp(z - lse)
    value = float(weight * (lse - z[target_index]))

    def fn(g):
        d = p.copy()
        d[target_index] -= 1.0
        return (float(g) * weight * d,)

    return _make(np.asarray(value), (logits,), fn)
