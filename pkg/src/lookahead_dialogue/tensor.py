"""Dense float64 tensors with reverse-mode automatic differentiation.

Dynamic-graph engine sized for the dialogue model: every operation links its
output tensor back to its inputs together with a backward closure, and
``backward`` replays the implicit tape in reverse topological order.  All
math is float64; values are checked for NaN/Inf after every op.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "Tensor",
    "no_grad",
    "grad_enabled",
    "tensor",
    "parameter",
    "zeros",
    "record",
    "matmul",
    "matvec",
    "dot",
    "add",
    "sub",
    "mul",
    "scale",
    "concat",
    "sigmoid",
    "tanh",
    "softmax",
    "cross_entropy",
    "sequence_cross_entropy",
    "logistic_loss",
    "tsum",
    "transpose",
    "stack_rows",
    "row",
    "mean_rows",
    "pick",
    "stack_scalars",
    "pointwise",
    "backward",
    "zero_grads",
    "gradient_check",
]

_GRAD_ENABLED = True


class no_grad:
    """Context manager that disables graph recording (inference mode)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


def grad_enabled() -> bool:
    return _GRAD_ENABLED


def _check_finite(arr: np.ndarray, op: str) -> None:
    if not np.isfinite(arr).all():
        raise FloatingPointError(f"non-finite value produced by {op}")


class Tensor:
    """Dense array plus optional gradient buffer and graph linkage.

    ``data`` is always a C-contiguous float64 ndarray.  ``grad`` is allocated
    lazily and has the same shape.  Non-leaf tensors keep references to their
    parents and a backward closure; leaves have neither.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_op")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim and not arr.flags.c_contiguous:
            arr = np.ascontiguousarray(arr)
        _check_finite(arr, "tensor")
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None
        self._op = "leaf"

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def backward(self) -> None:
        backward(self)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        if other.data.ndim == 1:
            return matvec(self, other)
        return matmul(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, op={self._op})"


def tensor(data) -> Tensor:
    return Tensor(data)


def parameter(data) -> Tensor:
    return Tensor(data, requires_grad=True)


def zeros(*shape) -> Tensor:
    return Tensor(np.zeros(shape))


def record(data: np.ndarray, parents, backward_fn, op: str) -> Tensor:
    """Create an op output, linking it into the graph when recording is on.

    ``backward_fn(grad_out)`` must return one gradient array (or None) per
    parent, in order; entries may also be accumulated directly into a
    parent's ``.grad`` by the closure, in which case it returns None there.
    """
    out = Tensor(data)  # the constructor performs the finite check
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
        out._op = op
    return out


# ---------------------------------------------------------------------------
# primitive ops


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.data.shape} x {b.data.shape}")

    def back(g):
        return g @ b.data.T, a.data.T @ g

    return record(a.data @ b.data, (a, b), back, "matmul")


def matvec(m: Tensor, v: Tensor) -> Tensor:
    if m.data.ndim != 2 or v.data.ndim != 1 or m.data.shape[1] != v.data.shape[0]:
        raise ValueError(f"matvec shape mismatch: {m.data.shape} x {v.data.shape}")

    def back(g):
        return g[:, None] * v.data[None, :], m.data.T @ g

    return record(m.data @ v.data, (m, v), back, "matvec")


def dot(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape or a.data.ndim != 1:
        raise ValueError(f"dot shape mismatch: {a.data.shape} . {b.data.shape}")

    def back(g):
        return g * b.data, g * a.data

    return record(np.dot(a.data, b.data), (a, b), back, "dot")


def _same_shape(a: Tensor, b: Tensor, op: str) -> None:
    if a.data.shape != b.data.shape:
        raise ValueError(f"{op} shape mismatch: {a.data.shape} vs {b.data.shape}")


def add(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "add")
    return record(a.data + b.data, (a, b), lambda g: (g, g), "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "sub")
    return record(a.data - b.data, (a, b), lambda g: (g, -g), "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same_shape(a, b, "mul")

    def back(g):
        return g * b.data, g * a.data

    return record(a.data * b.data, (a, b), back, "mul")


def scale(x: Tensor, s: Tensor) -> Tensor:
    """Multiply a tensor by a scalar tensor (the one broadcast the model needs)."""
    if s.data.size != 1:
        raise ValueError("scale expects a scalar second argument")

    def back(g):
        return g * s.data, np.sum(g * x.data)

    return record(x.data * s.data, (x, s), back, "scale")


def concat(parts) -> Tensor:
    parts = list(parts)
    if not parts:
        raise ValueError("concat of zero tensors")
    for p in parts:
        if p.data.ndim != 1:
            raise ValueError("concat supports 1-d tensors only")
    sizes = [p.data.shape[0] for p in parts]
    offs = np.cumsum([0] + sizes)

    def back(g):
        return tuple(g[offs[i] : offs[i + 1]] for i in range(len(parts)))

    return record(np.concatenate([p.data for p in parts]), parts, back, "concat")


def sigmoid(x: Tensor) -> Tensor:
    out = _sigmoid_stable(x.data)

    def back(g):
        return (g * out * (1.0 - out),)

    return record(out, (x,), back, "sigmoid")


def _sigmoid_stable(x: np.ndarray) -> np.ndarray:
    # branch on sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)

    def back(g):
        return (g * (1.0 - out * out),)

    return record(out, (x,), back, "tanh")


def softmax(v: Tensor) -> Tensor:
    if v.data.ndim != 1 or v.data.shape[0] < 1:
        raise ValueError("softmax expects a nonempty vector")
    shifted = v.data - v.data.max()
    e = np.exp(shifted)
    out = e / e.sum()

    def back(g):
        return (out * (g - np.dot(g, out)),)

    return record(out, (v,), back, "softmax")


def cross_entropy(logits: Tensor, target: int) -> Tensor:
    """Negative log softmax probability of ``target`` under ``logits``."""
    n = logits.data.shape[0]
    if logits.data.ndim != 1:
        raise ValueError("cross_entropy expects a logit vector")
    if not 0 <= target < n:
        raise IndexError(f"target {target} out of range for {n} logits")
    shifted = logits.data - logits.data.max()
    lse = np.log(np.exp(shifted).sum())
    loss = lse - shifted[target]
    probs = np.exp(shifted - lse)

    def back(g):
        d = probs * g
        d[target] -= g
        return (d,)

    return record(np.float64(loss), (logits,), back, "cross_entropy")


def logistic_loss(logit: Tensor, label: float) -> Tensor:
    """Binary cross-entropy of sigmoid(logit) against a 0/1 label, stable form."""
    if logit.data.size != 1:
        raise ValueError("logistic_loss expects a scalar logit")
    x = float(logit.data)
    # softplus(x) - label*x computed without overflow
    loss = max(x, 0.0) + np.log1p(np.exp(-abs(x))) - label * x
    p = float(_sigmoid_stable(np.asarray([x]))[0])

    def back(g):
        return (np.asarray(g, dtype=np.float64).reshape(logit.data.shape) * (p - label),)

    return record(np.float64(loss), (logit,), back, "logistic_loss")


def tsum(x: Tensor) -> Tensor:
    def back(g):
        return (np.full_like(x.data, float(g)),)

    return record(np.float64(x.data.sum()), (x,), back, "sum")


def transpose(m: Tensor) -> Tensor:
    if m.data.ndim != 2:
        raise ValueError("transpose expects a matrix")

    def back(g):
        return (g.T,)

    return record(m.data.T.copy(), (m,), back, "transpose")


def stack_rows(parts) -> Tensor:
    """Stack equal-length vectors into a matrix, one per row."""
    parts = list(parts)
    if not parts or any(p.data.ndim != 1 for p in parts):
        raise ValueError("stack_rows expects 1-d tensors")

    def back(g):
        return tuple(g[i] for i in range(len(parts)))

    return record(np.stack([p.data for p in parts]), parts, back, "stack_rows")


def sequence_cross_entropy(logits: Tensor, targets) -> Tensor:
    """Summed token negative log-likelihood over a (steps x vocab) logit matrix."""
    ids = list(targets)
    if logits.data.ndim != 2 or logits.data.shape[0] != len(ids):
        raise ValueError("logit rows must match target count")
    n, v = logits.data.shape
    if any(not 0 <= t < v for t in ids):
        raise IndexError("target id out of range")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(n)
    loss = float((lse - shifted[rows, ids]).sum())
    probs = np.exp(shifted - lse[:, None])

    def back(g):
        d = probs * g
        d[rows, ids] -= g
        return (d,)

    return record(np.float64(loss), (logits,), back, "sequence_cross_entropy")


def row(m: Tensor, i: int) -> Tensor:
    """Select row i of a matrix (embedding lookup); sparse grad accumulation."""
    if m.data.ndim != 2:
        raise ValueError("row expects a matrix")

    def back(g):
        if m.requires_grad:
            if m.grad is None:
                m.grad = np.zeros_like(m.data)
            m.grad[i] += g
        return (None,)

    return record(m.data[i].copy(), (m,), back, "row")


def mean_rows(m: Tensor, ids) -> Tensor:
    """Mean of selected matrix rows (utterance embedding); sparse grads."""
    idx = list(ids)
    if m.data.ndim != 2 or not idx:
        raise ValueError("mean_rows expects a matrix and nonempty ids")

    def back(g):
        if m.requires_grad:
            if m.grad is None:
                m.grad = np.zeros_like(m.data)
            np.add.at(m.grad, idx, g / len(idx))
        return (None,)

    return record(m.data[idx].mean(axis=0), (m,), back, "mean_rows")


def pick(v: Tensor, i: int) -> Tensor:
    if v.data.ndim != 1 or not 0 <= i < v.data.shape[0]:
        raise IndexError("pick index out of range")

    def back(g):
        d = np.zeros_like(v.data)
        d[i] = g
        return (d,)

    return record(np.float64(v.data[i]), (v,), back, "pick")


def stack_scalars(parts) -> Tensor:
    parts = list(parts)
    if not parts or any(p.data.size != 1 for p in parts):
        raise ValueError("stack_scalars expects scalar tensors")

    def back(g):
        return tuple(np.asarray(g[i]).reshape(p.data.shape) for i, p in enumerate(parts))

    return record(np.asarray([float(p.data) for p in parts]), parts, back, "stack")


_POINTWISE = {"sigmoid": sigmoid, "tanh": tanh, "add": add, "mul": mul, "sub": sub, "concat": None}


def pointwise(name: str, *args):
    """Dispatch the elementwise family by name (concat takes the list form)."""
    if name not in _POINTWISE:
        raise ValueError(f"unknown pointwise op {name!r}")
    if name == "concat":
        return concat(list(args))
    return _POINTWISE[name](*args)


# ---------------------------------------------------------------------------
# backward pass


def _topo_order(loss: Tensor):
    order, visited = [], set()
    stack = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))
    return order


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into every reachable parameter's ``.grad``.

    Each graph node is visited exactly once, in reverse topological order.
    """
    if loss.data.size != 1:
        raise ValueError("backward requires a scalar loss")
    if not loss.requires_grad:
        return
    order = _topo_order(loss)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        fn = node._backward
        if fn is None or node.grad is None:
            continue
        grads = fn(node.grad)
        for p, g in zip(node._parents, grads):
            if g is None or not p.requires_grad:
                continue
            if p.grad is None:
                p.grad = np.array(g, dtype=np.float64).reshape(p.data.shape)
            else:
                p.grad += np.reshape(g, p.data.shape)


def zero_grads(params) -> None:
    for p in params:
        p.grad = None


def gradient_check(loss_fn, params, eps: float = 1e-5, coords_per_param: int | None = None, rng=None):
    """Compare analytic gradients of ``loss_fn()`` against central differences.

    ``loss_fn`` must rebuild its graph from the live ``params`` each call.
    Returns the worst relative error ``|analytic - fd| / max(1, |fd|)`` seen.
    """
    zero_grads(params)
    loss = loss_fn()
    backward(loss)
    analytic = [None if p.grad is None else p.grad.copy() for p in params]
    worst = 0.0
    rng = rng or np.random.default_rng(0)
    for p, a in zip(params, analytic):
        flat = p.data.reshape(-1)
        n = flat.shape[0]
        idxs = range(n)
        if coords_per_param is not None and coords_per_param < n:
            idxs = rng.choice(n, size=coords_per_param, replace=False)
        ga = np.zeros(n) if a is None else a.reshape(-1)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + eps
            with no_grad():
                up = float(loss_fn().data)
            flat[i] = orig - eps
            with no_grad():
                down = float(loss_fn().data)
            flat[i] = orig
            fd = (up - down) / (2.0 * eps)
            err = abs(ga[i] - fd) / max(1.0, abs(fd))
            worst = max(worst, err)
    zero_grads(params)
    return worst
