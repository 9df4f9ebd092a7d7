"""Minimal reverse-mode automatic differentiation over numpy arrays.

Every operation records its parents and a closure that routes the output
gradient back to them; ``backward`` walks the recorded graph in reverse
topological order. Arithmetic is float32 in production; the same graph code
runs in float64 when fed float64 arrays, which is how the finite-difference
gradient checks obtain their oracle.

Broadcasting is deliberately limited to three cases: identical shapes, one
scalar operand, and (n, d) against (d,) rows.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..errors import ContractError, ShapeError

LOGIT_CLAMP = 30.0
EPS_DENOM = 1e-8
EPS_PROB = 1e-7


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"


def as_tensor(x, dtype=np.float32) -> Tensor:
    if isinstance(x, Tensor):
        return x
    if isinstance(x, np.ndarray):
        return Tensor(x)
    return Tensor(np.asarray(x, dtype=dtype))


def parameter(data, rng: np.random.Generator | None = None) -> Tensor:
    return Tensor(np.asarray(data, dtype=np.float32), requires_grad=True)


def _accumulate(t: Tensor, g: np.ndarray) -> None:
    if not t.requires_grad:
        return
    if t.grad is None:
        t.grad = np.zeros_like(t.data)
    t.grad += g


def _node(data: np.ndarray, parents: Sequence[Tensor], backward) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def zero_grads(params: Sequence[Tensor]) -> None:
    for p in params:
        p.grad = None


def backward(loss: Tensor) -> None:
    """Fill .grad on every requires_grad tensor reachable from `loss`."""
    if loss.data.size != 1:
        raise ContractError(f"backward needs a scalar, got shape {loss.shape}")
    if not loss.requires_grad:
        raise ContractError("backward called before a differentiable forward pass was recorded")

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
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))

    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


def _check_same_dtype(*tensors: Tensor) -> None:
    dtypes = {t.data.dtype for t in tensors}
    if len(dtypes) > 1:
        raise ShapeError(f"mixed dtypes in one operation: {sorted(map(str, dtypes))}")


def _broadcast_ok(a: Tensor, b: Tensor) -> None:
    sa, sb = a.shape, b.shape
    if sa == sb or sa == () or sb == ():
        return
    if len(sa) == 2 and sb == (sa[1],):
        return
    if len(sb) == 2 and sa == (sb[1],):
        return
    raise ShapeError(f"incompatible shapes {sa} and {sb}")


def _reduce_to(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    if shape == ():
        return np.asarray(g.sum(), dtype=g.dtype)
    # (n, d) gradient flowing into a (d,) operand
    return g.sum(axis=0)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_ok(a, b)
    out_data = a.data + b.data

    def grad_fn(g):
        _accumulate(a, _reduce_to(g, a.shape))
        _accumulate(b, _reduce_to(g, b.shape))

    return _node(out_data, (a, b), grad_fn)


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_ok(a, b)
    out_data = a.data - b.data

    def grad_fn(g):
        _accumulate(a, _reduce_to(g, a.shape))
        _accumulate(b, -_reduce_to(g, b.shape))

    return _node(out_data, (a, b), grad_fn)


def neg(a) -> Tensor:
    a = as_tensor(a)

    def grad_fn(g):
        _accumulate(a, -g)

    return _node(-a.data, (a,), grad_fn)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_ok(a, b)
    out_data = a.data * b.data

    def grad_fn(g):
        _accumulate(a, _reduce_to(g * b.data, a.shape))
        _accumulate(b, _reduce_to(g * a.data, b.shape))

    return _node(out_data, (a, b), grad_fn)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_ok(a, b)
    out_data = a.data / b.data

    def grad_fn(g):
        _accumulate(a, _reduce_to(g / b.data, a.shape))
        _accumulate(b, _reduce_to(-g * a.data / (b.data * b.data), b.shape))

    return _node(out_data, (a, b), grad_fn)


def tanh(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.tanh(a.data)

    def grad_fn(g):
        _accumulate(a, g * (1.0 - out_data * out_data))

    return _node(out_data, (a,), grad_fn)


def sigmoid(a) -> Tensor:
    """Logistic function with logits clamped at +/-LOGIT_CLAMP."""
    a = as_tensor(a)
    z = np.clip(a.data, -LOGIT_CLAMP, LOGIT_CLAMP)
    out_data = 1.0 / (1.0 + np.exp(-z))
    inside = (np.abs(a.data) < LOGIT_CLAMP).astype(a.data.dtype)

    def grad_fn(g):
        _accumulate(a, g * out_data * (1.0 - out_data) * inside)

    return _node(out_data, (a,), grad_fn)


def log(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.log(a.data)

    def grad_fn(g):
        _accumulate(a, g / a.data)

    return _node(out_data, (a,), grad_fn)


def sqrt(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.sqrt(a.data)

    def grad_fn(g):
        _accumulate(a, g / (2.0 * out_data))

    return _node(out_data, (a,), grad_fn)


def clamp_min(a, lo: float) -> Tensor:
    a = as_tensor(a)
    out_data = np.maximum(a.data, a.data.dtype.type(lo))
    mask = (a.data > lo).astype(a.data.dtype)

    def grad_fn(g):
        _accumulate(a, g * mask)

    return _node(out_data, (a,), grad_fn)


def clamp(a, lo: float, hi: float) -> Tensor:
    a = as_tensor(a)
    out_data = np.clip(a.data, a.data.dtype.type(lo), a.data.dtype.type(hi))
    mask = ((a.data > lo) & (a.data < hi)).astype(a.data.dtype)

    def grad_fn(g):
        _accumulate(a, g * mask)

    return _node(out_data, (a,), grad_fn)


def total(a) -> Tensor:
    """Sum of all elements, as a scalar tensor."""
    a = as_tensor(a)

    def grad_fn(g):
        _accumulate(a, np.full_like(a.data, g))

    return _node(np.asarray(a.data.sum(), dtype=a.data.dtype), (a,), grad_fn)


def mean(a) -> Tensor:
    a = as_tensor(a)
    n = a.data.size

    def grad_fn(g):
        _accumulate(a, np.full_like(a.data, g / n))

    return _node(np.asarray(a.data.mean(), dtype=a.data.dtype), (a,), grad_fn)


def dot(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape or a.data.ndim != 1:
        raise ShapeError(f"dot needs two equal-length vectors, got {a.shape} and {b.shape}")
    _check_same_dtype(a, b)

    def grad_fn(g):
        _accumulate(a, g * b.data)
        _accumulate(b, g * a.data)

    return _node(np.asarray(a.data @ b.data), (a, b), grad_fn)


def row_dot(a, b) -> Tensor:
    """Per-row dot product of two (n, d) matrices, giving (n,)."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape or a.data.ndim != 2:
        raise ShapeError(f"row_dot needs two equal-shape matrices, got {a.shape} and {b.shape}")

    def grad_fn(g):
        _accumulate(a, g[:, None] * b.data)
        _accumulate(b, g[:, None] * a.data)

    return _node((a.data * b.data).sum(axis=1), (a, b), grad_fn)


def matvec(m, v) -> Tensor:
    m, v = as_tensor(m), as_tensor(v)
    if m.data.ndim != 2 or v.data.ndim != 1 or m.shape[1] != v.shape[0]:
        raise ShapeError(f"matvec shapes {m.shape} and {v.shape} do not align")

    def grad_fn(g):
        _accumulate(m, np.outer(g, v.data))
        _accumulate(v, m.data.T @ g)

    return _node(m.data @ v.data, (m, v), grad_fn)


def vecmat(v, m) -> Tensor:
    v, m = as_tensor(v), as_tensor(m)
    if m.data.ndim != 2 or v.data.ndim != 1 or m.shape[0] != v.shape[0]:
        raise ShapeError(f"vecmat shapes {v.shape} and {m.shape} do not align")

    def grad_fn(g):
        _accumulate(v, m.data @ g)
        _accumulate(m, np.outer(v.data, g))

    return _node(v.data @ m.data, (v, m), grad_fn)


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shapes {a.shape} and {b.shape} do not align")

    def grad_fn(g):
        _accumulate(a, g @ b.data.T)
        _accumulate(b, a.data.T @ g)

    return _node(a.data @ b.data, (a, b), grad_fn)


def concat(parts: Sequence[Tensor]) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    if not parts:
        raise ContractError("concat of zero tensors")
    for p in parts:
        if p.data.ndim != 1:
            raise ShapeError(f"concat expects 1-D tensors, got shape {p.shape}")
    offsets = np.cumsum([0] + [p.shape[0] for p in parts])

    def grad_fn(g):
        for p, a, b in zip(parts, offsets[:-1], offsets[1:]):
            _accumulate(p, g[a:b])

    return _node(np.concatenate([p.data for p in parts]), tuple(parts), grad_fn)


def slice1d(a, start: int, stop: int) -> Tensor:
    a = as_tensor(a)
    if a.data.ndim != 1:
        raise ShapeError(f"slice1d expects a vector, got shape {a.shape}")

    def grad_fn(g):
        if a.requires_grad:
            buf = np.zeros_like(a.data)
            buf[start:stop] = g
            _accumulate(a, buf)

    return _node(a.data[start:stop].copy(), (a,), grad_fn)


def stack_rows(rows: Sequence[Tensor]) -> Tensor:
    rows = [as_tensor(r) for r in rows]
    if not rows:
        raise ContractError("stack_rows of zero tensors")

    def grad_fn(g):
        for i, r in enumerate(rows):
            _accumulate(r, g[i])

    return _node(np.stack([r.data for r in rows]), tuple(rows), grad_fn)


def hconcat(parts: Sequence[Tensor]) -> Tensor:
    """Concatenate (n, k_i) blocks column-wise; (n,) blocks count as (n, 1)."""
    parts = [as_tensor(p) for p in parts]
    if not parts:
        raise ContractError("hconcat of zero tensors")
    n = parts[0].shape[0]
    widths = []
    for p in parts:
        if p.shape[0] != n:
            raise ShapeError(f"hconcat row counts differ: {p.shape[0]} vs {n}")
        widths.append(1 if p.data.ndim == 1 else p.shape[1])
    offsets = np.cumsum([0] + widths)
    blocks = [p.data[:, None] if p.data.ndim == 1 else p.data for p in parts]

    def grad_fn(g):
        for p, a, b in zip(parts, offsets[:-1], offsets[1:]):
            piece = g[:, a:b]
            _accumulate(p, piece[:, 0] if p.data.ndim == 1 else piece)

    return _node(np.concatenate(blocks, axis=1), tuple(parts), grad_fn)


def row(a, i: int) -> Tensor:
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise ShapeError(f"row expects a matrix, got shape {a.shape}")

    def grad_fn(g):
        if a.requires_grad:
            buf = np.zeros_like(a.data)
            buf[i] = g
            _accumulate(a, buf)

    return _node(a.data[i].copy(), (a,), grad_fn)


def tile_rows(v, n: int) -> Tensor:
    v = as_tensor(v)
    if v.data.ndim != 1:
        raise ShapeError(f"tile_rows expects a vector, got shape {v.shape}")

    def grad_fn(g):
        _accumulate(v, g.sum(axis=0))

    return _node(np.tile(v.data, (n, 1)), (v,), grad_fn)


def mean_vecs(vecs: Sequence[Tensor]) -> Tensor:
    """Elementwise mean of equally-shaped vectors."""
    vecs = [as_tensor(v) for v in vecs]
    if not vecs:
        raise ContractError("mean_vecs of zero tensors")
    k = len(vecs)

    def grad_fn(g):
        share = g / k
        for v in vecs:
            _accumulate(v, share)

    return _node(np.mean([v.data for v in vecs], axis=0), tuple(vecs), grad_fn)


def transpose(a) -> Tensor:
    a = as_tensor(a)
    if a.data.ndim != 2:
        raise ShapeError(f"transpose expects a matrix, got shape {a.shape}")

    def grad_fn(g):
        _accumulate(a, g.T)

    return _node(a.data.T.copy(), (a,), grad_fn)


def softmax(a) -> Tensor:
    a = as_tensor(a)
    if a.data.ndim != 1:
        raise ShapeError(f"softmax expects a vector, got shape {a.shape}")
    z = a.data - a.data.max()
    e = np.exp(z)
    out_data = e / e.sum()

    def grad_fn(g):
        _accumulate(a, out_data * (g - (g * out_data).sum()))

    return _node(out_data, (a,), grad_fn)


def lstm_cell(w, u, b, x, h, c) -> Tensor:
    """One LSTM step; returns [h'; c'] stacked in a single (2S,) tensor.

    Gate layout along the 4S axis is (input, forget, cell, output).
    Pre-activations feeding the logistic gates are clamped at
    +/-LOGIT_CLAMP like every other logit in the package.
    """
    w, u, b, x, h, c = (as_tensor(t) for t in (w, u, b, x, h, c))
    s = h.shape[0]
    if w.shape != (4 * s, x.shape[0]) or u.shape != (4 * s, s) or b.shape != (4 * s,):
        raise ShapeError(
            f"lstm_cell parameter shapes {w.shape}/{u.shape}/{b.shape} do not match "
            f"input dim {x.shape[0]} and hidden dim {s}"
        )
    if c.shape != (s,):
        raise ShapeError(f"cell state shape {c.shape} does not match hidden dim {s}")

    a = w.data @ x.data + u.data @ h.data + b.data
    az = np.clip(a, -LOGIT_CLAMP, LOGIT_CLAMP)
    gate_in = 1.0 / (1.0 + np.exp(-az[0:s]))
    gate_fg = 1.0 / (1.0 + np.exp(-az[s : 2 * s]))
    cand = np.tanh(a[2 * s : 3 * s])
    gate_out = 1.0 / (1.0 + np.exp(-az[3 * s : 4 * s]))
    inside = (np.abs(a) < LOGIT_CLAMP).astype(a.dtype)

    c_new = gate_fg * c.data + gate_in * cand
    tanh_c_new = np.tanh(c_new)
    h_new = gate_out * tanh_c_new

    def grad_fn(g):
        dh, dc_in = g[:s], g[s:]
        d_gate_out = dh * tanh_c_new
        dc_total = dc_in + dh * gate_out * (1.0 - tanh_c_new * tanh_c_new)
        d_gate_fg = dc_total * c.data
        d_gate_in = dc_total * cand
        d_cand = dc_total * gate_in
        da = np.empty_like(a)
        da[0:s] = d_gate_in * gate_in * (1.0 - gate_in) * inside[0:s]
        da[s : 2 * s] = d_gate_fg * gate_fg * (1.0 - gate_fg) * inside[s : 2 * s]
        da[2 * s : 3 * s] = d_cand * (1.0 - cand * cand)
        da[3 * s : 4 * s] = d_gate_out * gate_out * (1.0 - gate_out) * inside[3 * s : 4 * s]
        _accumulate(w, np.outer(da, x.data))
        _accumulate(u, np.outer(da, h.data))
        _accumulate(b, da)
        _accumulate(x, w.data.T @ da)
        _accumulate(h, u.data.T @ da)
        _accumulate(c, dc_total * gate_fg)

    return _node(np.concatenate([h_new, c_new]), (w, u, b, x, h, c), grad_fn)
