"""Reverse-mode autodiff over small dense tensors.

A Value wraps a float64 numpy array (rank 1 or 2; scalars are shape-(1,))
together with a grad buffer of the same shape, allocated lazily on first
touch so forward-only evaluation never pays for it. Ops build the graph as
they run; backward() walks it once in reverse topological order and
accumulates into .grad. Gradients keep accumulating across calls until
zero_grads(), which is what lets one Adam step consume several sentence
losses.

The numeric inner loops live in the selected kernel backend; this module owns
graph structure and the backward closures only.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..errors import ContractError, ShapeError
from .backend import kernels as K


class Value:
    __slots__ = ("data", "_grad", "op", "parents", "_backward")

    def __init__(self, data, parents: tuple = (), op: str = "leaf"):
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        if arr.ndim > 2:
            raise ShapeError(f"Value payload must be rank 1 or 2, got shape {arr.shape}")
        self.data = arr
        self._grad = None
        self.op = op
        self.parents = parents
        self._backward = None

    @property
    def grad(self) -> np.ndarray:
        g = self._grad
        if g is None:
            g = np.zeros_like(self.data)
            self._grad = g
        return g

    @grad.setter
    def grad(self, buf) -> None:
        # augmented assignment (v.grad += g) reads, mutates, then stores back
        self._grad = buf

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a scalar, got shape {self.data.shape}")
        return float(self.data.reshape(-1)[0])

    def backward(self) -> None:
        backward(self)

    def __repr__(self):
        return f"Value(op={self.op!r}, shape={self.data.shape})"


def _need_vec(v: Value, what: str) -> None:
    if v.data.ndim != 1:
        raise ShapeError(f"{what} expects a vector, got shape {v.data.shape}")


def _need_mat(v: Value, what: str) -> None:
    if v.data.ndim != 2:
        raise ShapeError(f"{what} expects a matrix, got shape {v.data.shape}")


# ------------------------------------------------------------------- ops

def matvec(W: Value, x: Value) -> Value:
    _need_mat(W, "matvec")
    _need_vec(x, "matvec")
    if W.data.shape[1] != x.data.shape[0]:
        raise ShapeError(f"matvec shapes {W.data.shape} and {x.data.shape} do not chain")
    out = Value(K.matvec(W.data, x.data), (W, x), "matvec")

    def _bwd():
        K.matvec_bwd(W.data, x.data, out.grad, W.grad, x.grad)

    out._backward = _bwd
    return out


def affine(W: Value, b: Value, x: Value) -> Value:
    """W @ x + b."""
    _need_mat(W, "affine")
    _need_vec(b, "affine")
    _need_vec(x, "affine")
    if W.data.shape[1] != x.data.shape[0] or W.data.shape[0] != b.data.shape[0]:
        raise ShapeError(
            f"affine shapes W{W.data.shape} b{b.data.shape} x{x.data.shape} do not chain"
        )
    out = Value(K.affine1(W.data, b.data, x.data), (W, b, x), "affine")

    def _bwd():
        K.affine1_bwd(W.data, x.data, out.grad, W.grad, b.grad, x.grad)

    out._backward = _bwd
    return out


def affine_pair(W: Value, b: Value, u: Value, v: Value) -> Value:
    """W @ concat(u, v) + b without materializing the concat node."""
    _need_mat(W, "affine_pair")
    _need_vec(u, "affine_pair")
    _need_vec(v, "affine_pair")
    if W.data.shape[1] != u.data.shape[0] + v.data.shape[0]:
        raise ShapeError(
            f"affine_pair shapes W{W.data.shape} u{u.data.shape} v{v.data.shape} do not chain"
        )
    out = Value(K.affine2(W.data, b.data, u.data, v.data), (W, b, u, v), "affine_pair")

    def _bwd():
        K.affine2_bwd(W.data, u.data, v.data, out.grad, W.grad, b.grad, u.grad, v.grad)

    out._backward = _bwd
    return out


def _binary_same_shape(a: Value, b: Value, what: str) -> None:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"{what} shapes {a.data.shape} and {b.data.shape} differ")


def add(a: Value, b: Value) -> Value:
    _binary_same_shape(a, b, "add")
    out = Value(K.add(a.data, b.data), (a, b), "add")

    def _bwd():
        K.add_bwd(out.grad, a.grad, b.grad)

    out._backward = _bwd
    return out


def hadamard(a: Value, b: Value) -> Value:
    _binary_same_shape(a, b, "hadamard")
    out = Value(K.hadamard(a.data, b.data), (a, b), "hadamard")

    def _bwd():
        K.hadamard_bwd(a.data, b.data, out.grad, a.grad, b.grad)

    out._backward = _bwd
    return out


def one_minus(x: Value) -> Value:
    """1 - x, the coupled input gate."""
    out = Value(K.one_minus(x.data), (x,), "one_minus")

    def _bwd():
        K.one_minus_bwd(out.grad, x.grad)

    out._backward = _bwd
    return out


def negate(x: Value) -> Value:
    out = Value(K.negate(x.data), (x,), "negate")

    def _bwd():
        K.negate_bwd(out.grad, x.grad)

    out._backward = _bwd
    return out


def sigmoid(x: Value) -> Value:
    out = Value(K.sigmoid(x.data), (x,), "sigmoid")

    def _bwd():
        K.sigmoid_bwd(out.data, out.grad, x.grad)

    out._backward = _bwd
    return out


def tanh(x: Value) -> Value:
    out = Value(K.tanh(x.data), (x,), "tanh")

    def _bwd():
        K.tanh_bwd(out.data, out.grad, x.grad)

    out._backward = _bwd
    return out


def concat(a: Value, b: Value) -> Value:
    _need_vec(a, "concat")
    _need_vec(b, "concat")
    out = Value(K.concat2(a.data, b.data), (a, b), "concat")

    def _bwd():
        K.concat2_bwd(out.grad, a.grad, b.grad)

    out._backward = _bwd
    return out


def mul_const(x: Value, c: np.ndarray) -> Value:
    """Elementwise product with a constant array (dropout masks)."""
    c = np.ascontiguousarray(c, dtype=np.float64)
    if c.shape != x.data.shape:
        raise ShapeError(f"mul_const shapes {x.data.shape} and {c.shape} differ")
    out = Value(K.hadamard(x.data, c), (x,), "mul_const")

    def _bwd():
        x.grad += c * out.grad

    out._backward = _bwd
    return out


def row(table: Value, i: int) -> Value:
    """Embedding lookup: copy of row i, gradient scattered back into the table."""
    _need_mat(table, "row")
    if not 0 <= i < table.data.shape[0]:
        raise ShapeError(f"row index {i} out of range for table shape {table.data.shape}")
    out = Value(table.data[i].copy(), (table,), "row")

    def _bwd():
        table.grad[i] += out.grad

    out._backward = _bwd
    return out


def vslice(x: Value, a: int, b: int) -> Value:
    """Contiguous sub-vector x[a:b]."""
    _need_vec(x, "vslice")
    if not 0 <= a < b <= x.data.shape[0]:
        raise ShapeError(f"vslice [{a}:{b}] out of range for shape {x.data.shape}")
    out = Value(x.data[a:b].copy(), (x,), "vslice")

    def _bwd():
        x.grad[a:b] += out.grad

    out._backward = _bwd
    return out


def pick(x: Value, i: int) -> Value:
    """Scalar element x[i]."""
    _need_vec(x, "pick")
    if not 0 <= i < x.data.shape[0]:
        raise ShapeError(f"pick index {i} out of range for shape {x.data.shape}")
    out = Value(x.data[i : i + 1].copy(), (x,), "pick")

    def _bwd():
        x.grad[i] += out.grad[0]

    out._backward = _bwd
    return out


def pick2(T: Value, i: int, j: int) -> Value:
    """Scalar element T[i, j] (transition scores)."""
    _need_mat(T, "pick2")
    r, c = T.data.shape
    if not (0 <= i < r and 0 <= j < c):
        raise ShapeError(f"pick2 index ({i}, {j}) out of range for shape {T.data.shape}")
    out = Value(T.data[i, j].reshape(1).copy(), (T,), "pick2")

    def _bwd():
        T.grad[i, j] += out.grad[0]

    out._backward = _bwd
    return out


def vsum(x: Value) -> Value:
    """Sum of all elements, as a scalar Value."""
    out = Value(np.array([x.data.sum()]), (x,), "vsum")

    def _bwd():
        x.grad += out.grad.reshape(-1)[0]

    out._backward = _bwd
    return out


def log_sum_exp(xs: Sequence[Value]) -> Value:
    """log(sum_i exp(x_i)) over scalar Values, max-shifted for stability.

    Backward distributes the incoming gradient by the softmax weights of xs.
    """
    if len(xs) == 0:
        raise ContractError("log_sum_exp over an empty sequence")
    for x in xs:
        if x.data.size != 1:
            raise ShapeError(f"log_sum_exp needs scalars, got shape {x.data.shape}")
    vals = np.array([x.data.reshape(-1)[0] for x in xs])
    m = vals.max()
    e = np.exp(vals - m)
    s = e.sum()
    out = Value(np.array([m + np.log(s)]), tuple(xs), "log_sum_exp")
    w = e / s

    def _bwd():
        g = out.grad[0]
        for xi, wi in zip(xs, w):
            xi.grad[0] += wi * g

    out._backward = _bwd
    return out


def gate_softmax(logits: Sequence[Value]) -> list[Value]:
    """Per-dimension softmax across K equal-length gate logit vectors.

    Returns K vectors that sum to 1 at every dimension. Backward for output j
    is g_j*s_j*(delta_ij - s_i) into logit i; the closures accumulate, so the
    outputs may be consumed independently.
    """
    if len(logits) == 0:
        raise ContractError("gate_softmax over an empty sequence")
    n = logits[0].data.shape[0]
    for v in logits:
        _need_vec(v, "gate_softmax")
        if v.data.shape[0] != n:
            raise ShapeError(
                f"gate_softmax logit shapes differ: {logits[0].data.shape} vs {v.data.shape}"
            )
    X = np.stack([v.data for v in logits])
    M = X.max(axis=0)
    E = np.exp(X - M)
    S = E / E.sum(axis=0)
    parents = tuple(logits)
    outs = []
    for j in range(len(logits)):
        out = Value(S[j].copy(), parents, "gate_softmax")

        def _bwd(j=j, out=out):
            gj = S[j] * out.grad
            for i, p in enumerate(parents):
                contrib = -S[i] * gj
                if i == j:
                    contrib = contrib + gj
                p.grad += contrib

        out._backward = _bwd
        outs.append(out)
    return outs


# -------------------------------------------------------------- traversal

def topo_order(root: Value) -> list[Value]:
    """Inputs-first topological order, computed iteratively.

    Sentence graphs routinely outgrow the recursion limit, so this is an
    explicit-stack DFS rather than the usual recursive build_topo.
    """
    order: list[Value] = []
    visited: set[int] = set()
    stack: list[tuple[Value, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def backward(root: Value) -> None:
    """Accumulate d(root)/d(node) into .grad for every node reachable from root."""
    if root.data.size != 1:
        raise ContractError(f"backward root must be scalar, got shape {root.data.shape}")
    order = topo_order(root)
    root.grad.reshape(-1)[0] += 1.0
    for node in reversed(order):
        if node._backward is not None:
            node._backward()


def zero_grads(values: Iterable[Value]) -> None:
    for v in values:
        v._grad = None
