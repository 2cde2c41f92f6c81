"""Minimal reverse-mode autodiff over float64 numpy arrays.

Just enough surface for the imputer backbones: elementwise arithmetic with
broadcasting, 2-D matmul, activations, reductions, shape ops, and an `external`
node for splicing in gradients computed outside the graph (the transport term).
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape` (reverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("value", "grad", "_parents", "_vjp")

    def __init__(self, value, parents=(), vjp=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self._parents = tuple(parents)
        self._vjp = vjp

    @property
    def shape(self):
        return self.value.shape

    def item(self) -> float:
        return float(self.value)

    # -- graph construction ------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        return Tensor(
            self.value + other.value,
            parents=(self, other),
            vjp=lambda g: (_unbroadcast(g, self.shape), _unbroadcast(g, other.shape)),
        )

    __radd__ = __add__

    def __neg__(self):
        return Tensor(-self.value, parents=(self,), vjp=lambda g: (-g,))

    def __sub__(self, other):
        return self + (-as_tensor(other))

    def __rsub__(self, other):
        return as_tensor(other) + (-self)

    def __mul__(self, other):
        other = as_tensor(other)
        return Tensor(
            self.value * other.value,
            parents=(self, other),
            vjp=lambda g: (
                _unbroadcast(g * other.value, self.shape),
                _unbroadcast(g * self.value, other.shape),
            ),
        )

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / float(scalar))

    def __matmul__(self, other):
        other = as_tensor(other)
        return Tensor(
            self.value @ other.value,
            parents=(self, other),
            vjp=lambda g: (g @ other.value.T, self.value.T @ g),
        )

    def __getitem__(self, index):
        def vjp(g):
            out = np.zeros_like(self.value)
            np.add.at(out, index, g)
            return (out,)

        return Tensor(self.value[index], parents=(self,), vjp=vjp)

    def reshape(self, *shape):
        old = self.shape
        return Tensor(self.value.reshape(*shape), parents=(self,),
                      vjp=lambda g: (g.reshape(old),))

    def transpose(self, *axes):
        inverse = np.argsort(axes)
        return Tensor(self.value.transpose(*axes), parents=(self,),
                      vjp=lambda g: (g.transpose(*inverse),))

    def sum(self):
        return Tensor(self.value.sum(), parents=(self,),
                      vjp=lambda g: (g * np.ones_like(self.value),))

    def mean(self):
        n = self.value.size
        return Tensor(self.value.mean(), parents=(self,),
                      vjp=lambda g: (g * np.ones_like(self.value) / n,))

    def square(self):
        return Tensor(self.value ** 2, parents=(self,), vjp=lambda g: (2.0 * g * self.value,))

    def relu(self):
        mask = self.value > 0
        return Tensor(np.where(mask, self.value, 0.0), parents=(self,),
                      vjp=lambda g: (g * mask,))

    def tanh(self):
        out = np.tanh(self.value)
        return Tensor(out, parents=(self,), vjp=lambda g: (g * (1.0 - out ** 2),))

    def sigmoid(self):
        out = 1.0 / (1.0 + np.exp(-self.value))
        return Tensor(out, parents=(self,), vjp=lambda g: (g * out * (1.0 - out),))

    # -- backward ----------------------------------------------------------

    def backward(self, seed=None):
        order: list[Tensor] = []
        seen: set[int] = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                stack.append((parent, False))

        self.grad = np.ones_like(self.value) if seed is None else np.asarray(seed, dtype=np.float64)
        for node in reversed(order):
            if node._vjp is None or node.grad is None:
                continue
            for parent, grad in zip(node._parents, node._vjp(node.grad)):
                if grad is None:
                    continue
                parent.grad = grad if parent.grad is None else parent.grad + grad


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def concat(tensors: list[Tensor], axis: int) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.value.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=axis))

    return Tensor(np.concatenate([t.value for t in tensors], axis=axis),
                  parents=tuple(tensors), vjp=vjp)


def stack(tensors: list[Tensor], axis: int) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]

    def vjp(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return Tensor(np.stack([t.value for t in tensors], axis=axis),
                  parents=tuple(tensors), vjp=vjp)


def external(value: float, source: Tensor, grad_wrt_source: np.ndarray) -> Tensor:
    """Scalar node whose value and d(value)/d(source) were computed outside the
    graph; backward seeds `source` with the supplied gradient."""
    grad_wrt_source = np.asarray(grad_wrt_source, dtype=np.float64)
    if grad_wrt_source.shape != source.shape:
        raise ValueError(
            f"external gradient shape {grad_wrt_source.shape} does not match source {source.shape}"
        )
    return Tensor(float(value), parents=(source,),
                  vjp=lambda g: (g * grad_wrt_source,))
