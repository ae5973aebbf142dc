"""Parameter containers and the small layer zoo built on the tape.

Parameter name paths follow attribute/registration order, e.g.
``decoder.2.self_attn.q_proj.weight``, and are stable across runs for a
fixed config because construction order is fixed.
"""

from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from . import tensor as T
from .tensor import Tensor


class Parameter(Tensor):
    """A trainable leaf tensor with a dotted name assigned at registration."""

    __slots__ = ("name",)

    def __init__(self, data, name: str = ""):
        super().__init__(np.asarray(data), requires_grad=True)
        self.name = name


class Module:
    def __init__(self):
        object.__setattr__(self, "_parameters", {})
        object.__setattr__(self, "_children", {})

    def __setattr__(self, key, value):
        if isinstance(value, Parameter):
            self._parameters[key] = value
        elif isinstance(value, Module):
            self._children[key] = value
        object.__setattr__(self, key, value)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for key, p in self._parameters.items():
            yield prefix + key, p
        for key, child in self._children.items():
            yield from child.named_parameters(prefix + key + ".")

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def finalize_names(self):
        """Stamp the dotted path onto every parameter; call once after init."""
        names = set()
        for name, p in self.named_parameters():
            p.name = name
            if name in names:
                raise ValueError(f"duplicate parameter name {name!r}")
            names.add(name)
        return self

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def n_parameters(self) -> int:
        return sum(p.data.size for p in self.parameters())

    def astype(self, dtype):
        for p in self.parameters():
            p.data = p.data.astype(dtype)
        return self


class ModuleList(Module):
    def __init__(self, modules=()):
        super().__init__()
        self._items = []
        for m in modules:
            self.append(m)

    def append(self, module: Module):
        self._children[str(len(self._items))] = module
        self._items.append(module)

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __getitem__(self, i):
        return self._items[i]


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape, dtype) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Linear(Module):
    """y = x @ W + b with W stored as (in_features, out_features)."""

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator,
                 bias: bool = True, zero_init: bool = False, dtype=np.float32):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        if zero_init:
            w = np.zeros((in_features, out_features), dtype=dtype)
        else:
            w = xavier_uniform(rng, in_features, out_features, (in_features, out_features), dtype)
        self.weight = Parameter(w)
        self.bias = Parameter(np.zeros(out_features, dtype=dtype)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = T.matmul(x, self.weight)
        if self.bias is not None:
            out = T.add(out, self.bias)
        return out


class LayerNorm(Module):
    """Last-axis layer norm; affine is optional (adaLN paths supply their own)."""

    def __init__(self, dim: int, affine: bool = True, dtype=np.float32):
        super().__init__()
        self.dim = dim
        self.affine = affine
        if affine:
            self.gamma = Parameter(np.ones(dim, dtype=dtype))
            self.beta = Parameter(np.zeros(dim, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        out = T.layer_norm(x)
        if self.affine:
            out = T.add(T.mul(out, self.gamma), self.beta)
        return out


class Conv1d(Module):
    """Same-padded stride-1 1-D convolution over (..., C, L)."""

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int,
                 rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        fan_in = in_channels * kernel_size
        fan_out = out_channels * kernel_size
        self.weight = Parameter(
            xavier_uniform(rng, fan_in, fan_out, (out_channels, in_channels, kernel_size), dtype))
        self.bias = Parameter(np.zeros(out_channels, dtype=dtype))

    def __call__(self, x: Tensor) -> Tensor:
        return T.conv1d(x, self.weight, self.bias)


class MLP(Module):
    """Two-layer feedforward: Linear -> activation -> Linear."""

    def __init__(self, in_dim: int, hidden_dim: int, out_dim: int, rng: np.random.Generator,
                 activation=T.gelu, zero_init_last: bool = False, dtype=np.float32):
        super().__init__()
        self.fc1 = Linear(in_dim, hidden_dim, rng, dtype=dtype)
        self.fc2 = Linear(hidden_dim, out_dim, rng, zero_init=zero_init_last, dtype=dtype)
        self.activation = activation

    def __call__(self, x: Tensor) -> Tensor:
        return self.fc2(self.activation(self.fc1(x)))
