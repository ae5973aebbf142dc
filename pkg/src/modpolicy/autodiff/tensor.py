"""Reverse-mode autodiff over numpy arrays.

A Tensor wraps an ndarray and, while grad recording is enabled, remembers
the parents and local backward rule of the op that produced it.
``backward(loss)`` walks the recorded graph once in reverse topological
order, accumulates ``.grad`` buffers, and then clears the tape.

Reductions use numpy's fixed left-to-right ordering, so forward results
are bitwise reproducible for identical inputs. Everything runs at the
dtype of its inputs: build models in float32 for training, float64 for
gradient verification.
"""

from __future__ import annotations

import math
from contextlib import contextmanager

import numpy as np

LAYERNORM_EPS = 1e-5


class ShapeError(ValueError):
    """Operands with non-conforming shapes, named together with the op."""


class AutodiffError(RuntimeError):
    """Misuse of the tape (non-scalar backward, double backward, ...)."""


_GRAD_ENABLED = True


def grad_enabled() -> bool:
    return _GRAD_ENABLED


@contextmanager
def no_grad():
    """Disable tape recording inside the block (inference / sampling)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_op")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        if isinstance(data, Tensor):
            data = data.data
        self.data = np.asarray(data, dtype=dtype)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._backward = None
        self._op = ""

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, op={self._op or 'leaf'})"

    def zero_grad(self):
        self.grad = None

    # operator sugar; everything routes through the module-level ops
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return tslice(self, key)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes)


def as_tensor(x, dtype=None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=dtype))


def _node(data: np.ndarray, parents, backward, op: str) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out._op = op
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    else:
        out.requires_grad = False
        out._parents = ()
        out._backward = None
    return out


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum `grad` down to `shape` (reverse of numpy broadcasting)."""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def _accum(t: Tensor, g: np.ndarray):
    if t.grad is None:
        t.grad = g.copy() if isinstance(g, np.ndarray) and g.base is not None else np.asarray(g)
    else:
        t.grad = t.grad + g


# ---------------------------------------------------------------------------
# primitive ops


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out_data = a.data + b.data
    except ValueError:
        raise ShapeError(f"add: shapes {a.shape} and {b.shape} do not broadcast") from None

    def backward(g):
        if a.requires_grad:
            _accum(a, _unbroadcast(g, a.shape))
        if b.requires_grad:
            _accum(b, _unbroadcast(g, b.shape))

    return _node(out_data, (a, b), backward, "add")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out_data = a.data - b.data
    except ValueError:
        raise ShapeError(f"sub: shapes {a.shape} and {b.shape} do not broadcast") from None

    def backward(g):
        if a.requires_grad:
            _accum(a, _unbroadcast(g, a.shape))
        if b.requires_grad:
            _accum(b, _unbroadcast(-g, b.shape))

    return _node(out_data, (a, b), backward, "sub")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    try:
        out_data = a.data * b.data
    except ValueError:
        raise ShapeError(f"mul: shapes {a.shape} and {b.shape} do not broadcast") from None

    def backward(g):
        if a.requires_grad:
            _accum(a, _unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            _accum(b, _unbroadcast(g * a.data, b.shape))

    return _node(out_data, (a, b), backward, "mul")


def scale(a, s: float) -> Tensor:
    a = as_tensor(a)
    s = float(s)
    out_data = a.data * s

    def backward(g):
        _accum(a, g * s)

    return _node(out_data, (a,), backward, "scale")


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim == 0 or b.ndim == 0 or a.shape[-1] != b.shape[-2 if b.ndim > 1 else 0]:
        raise ShapeError(f"matmul: shapes {a.shape} and {b.shape} are not aligned")
    # stacked @ 2-D weight collapses to one GEMM (the dominant training case)
    dense = b.ndim == 2 and a.ndim > 2
    if dense:
        lead = a.shape[:-1]
        out_data = (a.data.reshape(-1, a.shape[-1]) @ b.data).reshape(lead + (b.shape[-1],))
    else:
        out_data = np.matmul(a.data, b.data)

    def backward(g):
        if a.requires_grad:
            if dense:
                ga = (g.reshape(-1, g.shape[-1]) @ b.data.T).reshape(a.shape)
                _accum(a, ga)
            elif b.ndim > 1:
                _accum(a, _unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape))
            else:
                _accum(a, _unbroadcast(np.multiply.outer(g, b.data), a.shape))
        if b.requires_grad:
            if dense or (b.ndim == 2 and a.ndim == 2):
                gb = a.data.reshape(-1, a.shape[-1]).T @ g.reshape(-1, g.shape[-1])
                _accum(b, gb)
            elif a.ndim > 1:
                _accum(b, _unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape))
            else:
                _accum(b, _unbroadcast(np.multiply.outer(a.data, g), b.shape))

    return _node(out_data, (a, b), backward, "matmul")


def tsum(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out_data = a.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is None:
            _accum(a, np.broadcast_to(g, a.shape).astype(a.dtype, copy=False))
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            _accum(a, np.broadcast_to(gg, a.shape).astype(a.dtype, copy=False))

    return _node(out_data, (a,), backward, "sum")


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out_data = a.data.mean(axis=axis, keepdims=keepdims)
    if axis is None:
        n = a.data.size
    elif isinstance(axis, tuple):
        n = int(np.prod([a.shape[ax] for ax in axis]))
    else:
        n = a.shape[axis]

    def backward(g):
        if axis is None:
            _accum(a, np.broadcast_to(g / n, a.shape).astype(a.dtype, copy=False))
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            _accum(a, np.broadcast_to(gg / n, a.shape).astype(a.dtype, copy=False))

    return _node(out_data, (a,), backward, "mean")


def softmax(a, axis: int = -1) -> Tensor:
    """Softmax with max-subtraction for stability."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        gs = (g * out_data).sum(axis=axis, keepdims=True)
        _accum(a, out_data * (g - gs))

    return _node(out_data, (a,), backward, "softmax")


def layer_norm(a, eps: float = LAYERNORM_EPS) -> Tensor:
    """Normalize over the last axis; affine parameters are applied by callers."""
    a = as_tensor(a)
    if a.ndim < 1 or a.shape[-1] < 1:
        raise ShapeError(f"layer_norm: needs a non-empty last axis, got {a.shape}")
    mu = a.data.mean(axis=-1, keepdims=True)
    centered = a.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    out_data = centered * inv

    def backward(g):
        g_centered = g - g.mean(axis=-1, keepdims=True)
        proj = (g * out_data).mean(axis=-1, keepdims=True)
        _accum(a, inv * (g_centered - out_data * proj))

    return _node(out_data, (a,), backward, "layer_norm")


_GELU_C = math.sqrt(2.0 / math.pi)


def gelu(a) -> Tensor:
    """tanh-form GELU."""
    a = as_tensor(a)
    x = a.data
    inner = _GELU_C * (x + 0.044715 * (x * x * x))
    th = np.tanh(inner)
    out_data = 0.5 * x * (1.0 + th)

    def backward(g):
        sech2 = 1.0 - th * th
        d_inner = _GELU_C * (1.0 + 3 * 0.044715 * x * x)
        _accum(a, g * (0.5 * (1.0 + th) + 0.5 * x * sech2 * d_inner))

    return _node(out_data, (a,), backward, "gelu")


def silu(a) -> Tensor:
    a = as_tensor(a)
    sig = 1.0 / (1.0 + np.exp(-a.data))
    out_data = a.data * sig

    def backward(g):
        _accum(a, g * (sig * (1.0 + a.data * (1.0 - sig))))

    return _node(out_data, (a,), backward, "silu")


def conv1d(x, w, bias=None) -> Tensor:
    """1-D convolution with "same" zero padding, stride 1.

    x: (..., C_in, L), w: (C_out, C_in, K) with odd K, bias: (C_out,).
    """
    x, w = as_tensor(x), as_tensor(w)
    if w.ndim != 3:
        raise ShapeError(f"conv1d: weight must be (C_out, C_in, K), got {w.shape}")
    c_out, c_in, k = w.shape
    if k % 2 != 1:
        raise ShapeError(f"conv1d: kernel size must be odd for same padding, got {k}")
    if x.ndim < 2 or x.shape[-2] != c_in:
        raise ShapeError(f"conv1d: input {x.shape} does not match weight {w.shape}")
    pad = k // 2
    length = x.shape[-1]

    batch_shape = x.shape[:-2]
    xb = x.data.reshape((-1, c_in, length))
    xp = np.pad(xb, ((0, 0), (0, 0), (pad, pad)))
    # windows: (B, C_in, L, K) view over the padded signal
    win = np.lib.stride_tricks.sliding_window_view(xp, k, axis=-1)
    # contract (C_in, K) against weight -> (B, L, C_out)
    out = np.einsum("bclk,dck->bld", win, w.data, optimize=True)
    out = np.ascontiguousarray(out.transpose(0, 2, 1))
    if bias is not None:
        out = out + as_tensor(bias).data[:, None]
    out_data = out.reshape(batch_shape + (c_out, length))

    parents = (x, w) if bias is None else (x, w, as_tensor(bias))

    def backward(g):
        gb = g.reshape((-1, c_out, length))
        if x.requires_grad:
            # full correlation of upstream grad with flipped kernel
            gp = np.pad(gb, ((0, 0), (0, 0), (pad, pad)))
            gwin = np.lib.stride_tricks.sliding_window_view(gp, k, axis=-1)
            wflip = w.data[:, :, ::-1]
            gx = np.einsum("bdlk,dck->bcl", gwin, wflip, optimize=True)
            _accum(x, gx.reshape(x.shape))
        if w.requires_grad:
            xp_ = np.pad(xb, ((0, 0), (0, 0), (pad, pad)))
            xwin = np.lib.stride_tricks.sliding_window_view(xp_, k, axis=-1)
            gw = np.einsum("bclk,bdl->dck", xwin, gb, optimize=True)
            _accum(w, gw)
        if bias is not None and parents[2].requires_grad:
            _accum(parents[2], gb.sum(axis=(0, 2)))

    return _node(out_data, parents, backward, "conv1d")


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat: empty tensor list")
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(lo, hi)
                _accum(t, g[tuple(idx)])

    return _node(out_data, tuple(tensors), backward, "concat")


def tslice(a, key) -> Tensor:
    a = as_tensor(a)
    # contiguous output: reduction order downstream must not depend on layout
    out_data = np.ascontiguousarray(a.data[key])

    def backward(g):
        buf = np.zeros_like(a.data)
        buf[key] = g
        _accum(a, buf)

    return _node(out_data, (a,), backward, "slice")


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    out_data = a.data.reshape(shape)

    def backward(g):
        _accum(a, g.reshape(a.shape))

    return _node(out_data, (a,), backward, "reshape")


def transpose(a, axes) -> Tensor:
    a = as_tensor(a)
    axes = tuple(axes)
    out_data = np.ascontiguousarray(np.transpose(a.data, axes))
    inverse = tuple(np.argsort(axes))

    def backward(g):
        _accum(a, np.transpose(g, inverse))

    return _node(out_data, (a,), backward, "transpose")


def swap_last_axes(a) -> Tensor:
    a = as_tensor(a)
    out_data = np.ascontiguousarray(np.swapaxes(a.data, -1, -2))

    def backward(g):
        _accum(a, np.swapaxes(g, -1, -2))

    return _node(out_data, (a,), backward, "swap_last_axes")


def upsample_nearest(a, factor: int) -> Tensor:
    """Repeat each position along the last axis `factor` times."""
    a = as_tensor(a)
    out_data = np.repeat(a.data, factor, axis=-1)

    def backward(g):
        _accum(a, g.reshape(g.shape[:-1] + (a.shape[-1], factor)).sum(axis=-1))

    return _node(out_data, (a,), backward, "upsample_nearest")


def avg_pool1d(a, factor: int) -> Tensor:
    """Non-overlapping mean pooling over the last axis."""
    a = as_tensor(a)
    length = a.shape[-1]
    if length % factor != 0:
        raise ShapeError(f"avg_pool1d: length {length} not divisible by {factor}")
    out_data = a.data.reshape(a.shape[:-1] + (length // factor, factor)).mean(axis=-1)

    def backward(g):
        _accum(a, np.repeat(g / factor, factor, axis=-1))

    return _node(out_data, (a,), backward, "avg_pool1d")


# ---------------------------------------------------------------------------
# backward pass


def backward(loss: Tensor):
    """Accumulate d(loss)/d(leaf) into every reachable ``.grad``; clears the tape."""
    if loss.data.size != 1:
        raise AutodiffError(f"backward expects a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise AutodiffError("loss does not require grad (empty tape or inside no_grad)")
    if loss._op == "<consumed>":
        raise AutodiffError("double backward is unsupported: tape already cleared")

    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
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
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))

    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._backward is not None:
            node._backward(node.grad)
            # free graph memory as we go
            node._parents = ()
            node._backward = None
            node.grad = None
    loss._op = "<consumed>"
