"""Dense-matrix reverse-mode automatic differentiation.

Every value is a 2-D float64 matrix wrapped in a :class:`Tensor`.  Operations
link each result to its operands, so a computation implicitly records its own
tape; calling ``backward()`` on a 1x1 loss walks that tape once in reverse
topological order and accumulates gradients into every tensor created with
``requires_grad=True``.  Operations whose operands are all constant are not
recorded at all.

The op set is fixed: matmul, add (with row-vector broadcast), sub, scaling by
a Python scalar or a 1x1 tensor, transpose, relu, sigmoid, squared Frobenius
norm, column concat/slice, and row softmax.  That is everything the model
needs; there is deliberately no general broadcasting.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np


class Tensor:
    """A rows x cols float64 matrix plus the bookkeeping reverse mode needs."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D matrix, got array of shape {arr.shape}")
        self.data = np.ascontiguousarray(arr)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def item(self) -> float:
        if self.data.shape != (1, 1):
            raise ValueError(f"item() needs a 1x1 tensor, got shape {self.data.shape}")
        return float(self.data[0, 0])

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into every trainable ancestor.

        Requires a scalar (1x1) value; anything else has no well-defined
        gradient seed.  Visits each recorded node exactly once.
        """
        if self.data.shape != (1, 1):
            raise ValueError(
                f"backward() requires a scalar loss, got shape {self.data.shape}"
            )
        order = _topo_order(self)
        self.grad = np.ones((1, 1))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return sub(self, other)

    def __mul__(self, scalar) -> "Tensor":
        return scale(self, scalar)

    def __rmul__(self, scalar) -> "Tensor":
        return scale(self, scalar)

    def __neg__(self) -> "Tensor":
        return scale(self, -1.0)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


def _topo_order(root: Tensor) -> list[Tensor]:
    # Iterative post-order DFS: parents always precede consumers.
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def _accumulate(t: Tensor, grad: np.ndarray) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += grad


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ValueError(
            f"matmul: inner dimensions do not match: {a.shape} @ {b.shape}"
        )
    out = Tensor(a.data @ b.data, requires_grad=a.requires_grad or b.requires_grad)
    if out.requires_grad:
        out._parents = (a, b)

        def backward(grad, a=a, b=b):
            _accumulate(a, grad @ b.data.T)
            _accumulate(b, a.data.T @ grad)

        out._backward = backward
    return out


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; also accepts a 1 x cols row vector as the second
    operand, broadcast across rows (the bias case)."""
    if a.shape != b.shape and a.shape == (1, b.shape[1]):
        a, b = b, a
    if a.shape != b.shape and b.shape != (1, a.shape[1]):
        raise ValueError(f"add: incompatible shapes {a.shape} + {b.shape}")
    broadcast = a.shape != b.shape
    out = Tensor(a.data + b.data, requires_grad=a.requires_grad or b.requires_grad)
    if out.requires_grad:
        out._parents = (a, b)

        def backward(grad, a=a, b=b, broadcast=broadcast):
            _accumulate(a, grad)
            _accumulate(b, grad.sum(axis=0, keepdims=True) if broadcast else grad)

        out._backward = backward
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    if a.shape != b.shape:
        raise ValueError(f"sub: incompatible shapes {a.shape} - {b.shape}")
    out = Tensor(a.data - b.data, requires_grad=a.requires_grad or b.requires_grad)
    if out.requires_grad:
        out._parents = (a, b)

        def backward(grad, a=a, b=b):
            _accumulate(a, grad)
            _accumulate(b, -grad)

        out._backward = backward
    return out


def scale(a: Tensor, factor) -> Tensor:
    """Multiply by a plain Python/numpy scalar (a constant, not a tensor)."""
    factor = float(factor)
    out = Tensor(a.data * factor, requires_grad=a.requires_grad)
    if out.requires_grad:
        out._parents = (a,)

        def backward(grad, a=a, factor=factor):
            _accumulate(a, factor * grad)

        out._backward = backward
    return out


def scalar_mul(s: Tensor, m: Tensor) -> Tensor:
    """Multiply matrix ``m`` by a 1x1 tensor ``s`` (a trainable coefficient)."""
    if s.shape != (1, 1):
        raise ValueError(f"scalar_mul: coefficient must be 1x1, got {s.shape}")
    out = Tensor(s.data[0, 0] * m.data, requires_grad=s.requires_grad or m.requires_grad)
    if out.requires_grad:
        out._parents = (s, m)

        def backward(grad, s=s, m=m):
            _accumulate(s, np.array([[np.sum(grad * m.data)]]))
            _accumulate(m, s.data[0, 0] * grad)

        out._backward = backward
    return out


def transpose(a: Tensor) -> Tensor:
    out = Tensor(a.data.T.copy(), requires_grad=a.requires_grad)
    if out.requires_grad:
        out._parents = (a,)

        def backward(grad, a=a):
            _accumulate(a, grad.T)

        out._backward = backward
    return out


def relu(a: Tensor) -> Tensor:
    """Entrywise max(0, x).  The subgradient at exactly 0 is taken as 0,
    which keeps the backward pass deterministic."""
    out = Tensor(np.maximum(a.data, 0.0), requires_grad=a.requires_grad)
    if out.requires_grad:
        out._parents = (a,)
        mask = a.data > 0.0

        def backward(grad, a=a, mask=mask):
            _accumulate(a, grad * mask)

        out._backward = backward
    return out


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    # Split on sign so exp() never sees a large positive argument.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(a: Tensor) -> Tensor:
    out = Tensor(_stable_sigmoid(a.data), requires_grad=a.requires_grad)
    if out.requires_grad:
        out._parents = (a,)
        value = out.data

        def backward(grad, a=a, value=value):
            _accumulate(a, grad * value * (1.0 - value))

        out._backward = backward
    return out


def frobenius_sq(a: Tensor) -> Tensor:
    """Sum of squared entries, as a 1x1 tensor."""
    flat = a.data.ravel()
    out = Tensor(np.array([[np.dot(flat, flat)]]), requires_grad=a.requires_grad)
    if out.requires_grad:
        out._parents = (a,)

        def backward(grad, a=a):
            _accumulate(a, (2.0 * grad[0, 0]) * a.data)

        out._backward = backward
    return out


def hconcat(parts: Sequence[Tensor]) -> Tensor:
    """Column-wise concatenation; all parts must share the row count."""
    parts = list(parts)
    if not parts:
        raise ValueError("hconcat: need at least one tensor")
    rows = parts[0].shape[0]
    for p in parts[1:]:
        if p.shape[0] != rows:
            raise ValueError(
                f"hconcat: row counts differ: {[p.shape for p in parts]}"
            )
    out = Tensor(
        np.concatenate([p.data for p in parts], axis=1),
        requires_grad=any(p.requires_grad for p in parts),
    )
    if out.requires_grad:
        out._parents = tuple(parts)
        edges = np.cumsum([0] + [p.shape[1] for p in parts])

        def backward(grad, parts=parts, edges=edges):
            for p, lo, hi in zip(parts, edges[:-1], edges[1:]):
                _accumulate(p, grad[:, lo:hi])

        out._backward = backward
    return out


def col_slice(a: Tensor, start: int, stop: int) -> Tensor:
    """Columns [start, stop) of ``a``."""
    if not 0 <= start <= stop <= a.shape[1]:
        raise ValueError(
            f"col_slice: range [{start}, {stop}) invalid for shape {a.shape}"
        )
    out = Tensor(a.data[:, start:stop].copy(), requires_grad=a.requires_grad)
    if out.requires_grad:
        out._parents = (a,)

        def backward(grad, a=a, start=start, stop=stop):
            padded = np.zeros_like(a.data)
            padded[:, start:stop] = grad
            _accumulate(a, padded)

        out._backward = backward
    return out


def softmax_row(a: Tensor) -> Tensor:
    """Softmax of a single 1 x m row (used for learnable mixing weights)."""
    if a.shape[0] != 1:
        raise ValueError(f"softmax_row: expected a 1 x m row, got {a.shape}")
    shifted = a.data - a.data.max()
    e = np.exp(shifted)
    out = Tensor(e / e.sum(), requires_grad=a.requires_grad)
    if out.requires_grad:
        out._parents = (a,)
        value = out.data

        def backward(grad, a=a, value=value):
            _accumulate(a, value * (grad - float((grad * value).sum())))

        out._backward = backward
    return out
