"""Reverse-mode autodiff on numpy arrays.

Just enough machinery for the models in this package: broadcasting
arithmetic, matmul, a few nonlinearities, reductions, slicing/concat, and
a tape.  Heavier fused operations (embedding lookup, layer norm, LSTM,
cross-entropy, dropout) live in layers.py and plug into the same tape by
constructing Tensors with a custom backward closure.

Dtype policy: arrays keep whatever float dtype they come in with —
training runs float32, gradient checking runs float64.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Tensor", "concat"]


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    """A numpy array with gradient plumbing.

    `parents` and `backward` link the tensor into the tape; `backward`
    receives the output gradient and is responsible for accumulating into
    each parent via `accumulate`.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, parents=(),
                 backward=None):
        if isinstance(data, np.generic):
            data = np.asarray(data)  # 0-d reduction results keep their dtype
        elif not isinstance(data, np.ndarray):
            data = np.asarray(data, dtype=np.float32)
        self.data = data
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self._parents = parents
        self._backward = backward

    # -- tape -------------------------------------------------------------

    def accumulate(self, grad: np.ndarray) -> None:
        # first contribution is stored by reference (never mutated: the
        # second contribution rebinds to a fresh `old + new`), so the
        # common single-consumer case costs no copy
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.asarray(grad, dtype=self.data.dtype)
        else:
            self.grad = self.grad + grad

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Backpropagate from this tensor through the whole tape."""
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen and p.requires_grad:
                    stack.append((p, False))
        if grad is None:
            grad = np.ones_like(self.data)
        self.grad = np.array(grad, dtype=self.data.dtype, copy=True)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
                if node._parents:  # interior node: grad fully consumed now
                    node.grad = None

    # -- shape utilities --------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __len__(self):
        return len(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype})"

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        src_shape = self.data.shape

        def back(g):
            self.accumulate(g.reshape(src_shape))

        return Tensor(self.data.reshape(shape), parents=(self,), backward=back)

    def transpose(self, *axes) -> "Tensor":
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        inverse = tuple(np.argsort(axes))

        def back(g):
            self.accumulate(g.transpose(inverse))

        return Tensor(self.data.transpose(axes), parents=(self,), backward=back)

    def __getitem__(self, key) -> "Tensor":
        parts = key if isinstance(key, tuple) else (key,)
        basic = all(isinstance(p, (int, np.integer, slice, type(None)))
                    or p is Ellipsis for p in parts)

        def back(g):
            if not self.requires_grad:
                return
            buf = np.zeros_like(self.data)
            if basic:  # basic indexing never aliases, so plain assignment works
                buf[key] = g
            else:
                np.add.at(buf, key, g)
            self.accumulate(buf)

        return Tensor(self.data[key], parents=(self,), backward=back)

    # -- arithmetic -------------------------------------------------------

    @staticmethod
    def _lift(other) -> "Tensor":
        return other if isinstance(other, Tensor) else Tensor(np.asarray(other))

    def __add__(self, other) -> "Tensor":
        other = self._lift(other)

        def back(g):
            self.accumulate(_unbroadcast(g, self.data.shape))
            other.accumulate(_unbroadcast(g, other.data.shape))

        return Tensor(self.data + other.data, parents=(self, other), backward=back)

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        def back(g):
            self.accumulate(-g)

        return Tensor(-self.data, parents=(self,), backward=back)

    def __sub__(self, other) -> "Tensor":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Tensor":
        return self._lift(other) + (-self)

    def __mul__(self, other) -> "Tensor":
        other = self._lift(other)

        def back(g):
            self.accumulate(_unbroadcast(g * other.data, self.data.shape))
            other.accumulate(_unbroadcast(g * self.data, other.data.shape))

        return Tensor(self.data * other.data, parents=(self, other), backward=back)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        other = self._lift(other)

        def back(g):
            self.accumulate(_unbroadcast(g / other.data, self.data.shape))
            other.accumulate(
                _unbroadcast(-g * self.data / (other.data * other.data),
                             other.data.shape))

        return Tensor(self.data / other.data, parents=(self, other), backward=back)

    def __pow__(self, exponent) -> "Tensor":
        if not isinstance(exponent, (int, float)):
            raise TypeError("only scalar exponents are supported")

        def back(g):
            self.accumulate(g * exponent * self.data ** (exponent - 1))

        return Tensor(self.data ** exponent, parents=(self,), backward=back)

    def __matmul__(self, other) -> "Tensor":
        other = self._lift(other)

        def back(g):
            self.accumulate(
                _unbroadcast(g @ other.data.swapaxes(-1, -2), self.data.shape))
            other.accumulate(
                _unbroadcast(self.data.swapaxes(-1, -2) @ g, other.data.shape))

        return Tensor(self.data @ other.data, parents=(self, other), backward=back)

    # -- reductions -------------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        def back(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self.accumulate(np.broadcast_to(g, self.data.shape))

        return Tensor(self.data.sum(axis=axis, keepdims=keepdims),
                      parents=(self,), backward=back)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        if axis is None:
            count = self.data.size
        elif isinstance(axis, tuple):
            count = int(np.prod([self.data.shape[a] for a in axis]))
        else:
            count = self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def flip(self, axis: int) -> "Tensor":
        """Reverse along one axis (the BiLSTM backward direction)."""
        index = [slice(None)] * self.data.ndim
        index[axis] = slice(None, None, -1)
        index = tuple(index)

        def back(g):
            self.accumulate(g[index])

        return Tensor(np.ascontiguousarray(self.data[index]),
                      parents=(self,), backward=back)

    # -- nonlinearities ---------------------------------------------------

    def tanh(self) -> "Tensor":
        out_data = np.tanh(self.data)

        def back(g):
            self.accumulate(g * (1.0 - out_data * out_data))

        return Tensor(out_data, parents=(self,), backward=back)

    def sigmoid(self) -> "Tensor":
        out_data = 0.5 * (np.tanh(0.5 * self.data) + 1.0)

        def back(g):
            self.accumulate(g * out_data * (1.0 - out_data))

        return Tensor(out_data, parents=(self,), backward=back)

    def exp(self) -> "Tensor":
        out_data = np.exp(self.data)

        def back(g):
            self.accumulate(g * out_data)

        return Tensor(out_data, parents=(self,), backward=back)

    def log(self) -> "Tensor":
        def back(g):
            self.accumulate(g / self.data)

        return Tensor(np.log(self.data), parents=(self,), backward=back)

    def relu(self) -> "Tensor":
        keep = self.data > 0

        def back(g):
            self.accumulate(g * keep)

        return Tensor(self.data * keep, parents=(self,), backward=back)

    def softmax(self, axis: int = -1) -> "Tensor":
        shifted = self.data - self.data.max(axis=axis, keepdims=True)
        e = np.exp(shifted)
        out_data = e / e.sum(axis=axis, keepdims=True)

        def back(g):
            inner = (g * out_data).sum(axis=axis, keepdims=True)
            self.accumulate((g - inner) * out_data)

        return Tensor(out_data, parents=(self,), backward=back)


def concat(tensors: list[Tensor], axis: int = -1) -> Tensor:
    """Concatenate along `axis`; backward splits the gradient back up."""
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def back(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            index = [slice(None)] * g.ndim
            index[axis] = slice(lo, hi)
            t.accumulate(g[tuple(index)])

    return Tensor(np.concatenate([t.data for t in tensors], axis=axis),
                  parents=tuple(tensors), backward=back)
