"""Learnable layers on top of the tensor engine.

A light module system in the spirit of the usual deep-learning toolkits:
``Module`` owns parameters (and buffers such as running statistics), knows
its train/eval mode, and can enumerate everything it owns under dotted
names. ``ParameterStore`` is the flat named view used by the optimizer,
gradient checks, and checkpoints.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .exceptions import ConfigError, DimensionError, StatisticsError
from .rng import RngState
from .tensor import Tensor


class Parameter(Tensor):
    """A leaf tensor updated by the optimizer."""

    def __init__(self, data):
        super().__init__(data, requires_grad=True)


class Module:
    """Base class: tracks child modules, parameters, buffers, and mode."""

    def __init__(self):
        self.training = True
        self._buffers: dict[str, np.ndarray] = {}

    def register_buffer(self, name: str, value: np.ndarray) -> None:
        self._buffers[name] = value

    def _children(self):
        for attr, value in vars(self).items():
            if attr.startswith("_") and attr != "_buffers":
                continue
            if isinstance(value, Module):
                yield attr, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield f"{attr}.{i}", item
            elif isinstance(value, dict):
                for key, item in value.items():
                    if isinstance(item, Module):
                        yield f"{attr}.{key}", item

    def named_parameters(self, prefix: str = ""):
        for attr, value in vars(self).items():
            if isinstance(value, Parameter):
                yield prefix + attr, value
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Parameter):
                        yield f"{prefix}{attr}.{i}", item
            elif isinstance(value, dict):
                for key, item in value.items():
                    if isinstance(item, Parameter):
                        yield f"{prefix}{attr}.{key}", item
        for name, child in self._children():
            yield from child.named_parameters(prefix=f"{prefix}{name}.")

    def named_buffers(self, prefix: str = ""):
        for name, value in self._buffers.items():
            yield prefix + name, value
        for name, child in self._children():
            yield from child.named_buffers(prefix=f"{prefix}{name}.")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def parameter_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None

    def train(self):
        self.training = True
        for _, child in self._children():
            child.train()
        return self

    def eval(self):
        self.training = False
        for _, child in self._children():
            child.eval()
        return self

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


class ParameterStore:
    """Flat named view over a module tree's parameters and buffers.

    Names are unique by construction (duplicates raise); gradients share the
    parameter's shape. This is the unit of optimizer steps, checkpoints, and
    snapshot/restore during early stopping.
    """

    def __init__(self, params: dict[str, Parameter], buffers: dict[str, np.ndarray] | None = None):
        self._params = dict(params)
        self._buffers = dict(buffers or {})

    @classmethod
    def from_module(cls, module: Module) -> "ParameterStore":
        params: dict[str, Parameter] = {}
        for name, p in module.named_parameters():
            if name in params:
                raise ConfigError(f"duplicate parameter name: {name}")
            params[name] = p
        buffers: dict[str, np.ndarray] = {}
        for name, b in module.named_buffers():
            if name in buffers or name in params:
                raise ConfigError(f"duplicate buffer name: {name}")
            buffers[name] = b
        return cls(params, buffers)

    def names(self):
        return list(self._params)

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def __iter__(self):
        return iter(self._params.items())

    def __len__(self):
        return len(self._params)

    def count(self) -> int:
        return sum(p.size for p in self._params.values())

    def gradients(self) -> dict[str, np.ndarray | None]:
        return {name: p.grad for name, p in self._params.items()}

    def zero_grad(self) -> None:
        for p in self._params.values():
            p.grad = None

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Parameters plus buffers, as one named map (checkpoint payload)."""
        out = {name: p.data for name, p in self._params.items()}
        out.update({f"buffer:{name}": b for name, b in self._buffers.items()})
        return out

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: arr.copy() for name, arr in self.state_arrays().items()}

    def restore(self, snap: dict[str, np.ndarray]) -> None:
        current = self.state_arrays()
        if set(snap) != set(current):
            raise ConfigError("snapshot names do not match the store")
        for name, arr in snap.items():
            target = current[name]
            if target.shape != arr.shape:
                raise DimensionError(f"snapshot shape mismatch for {name}")
            target[...] = arr


# ---------------------------------------------------------------------------


class Linear(Module):
    """Affine map over the last dimension, weights in U(+-1/sqrt(fan_in))."""

    def __init__(self, in_dim: int, out_dim: int, rng: RngState, bias: bool = True):
        super().__init__()
        bound = 1.0 / np.sqrt(in_dim)
        dtype = T.get_default_dtype()
        self.weight = Parameter(rng.uniform(-bound, bound, (in_dim, out_dim), dtype=dtype))
        self.bias = Parameter(np.zeros(out_dim, dtype=dtype)) if bias else None

    def forward(self, x: Tensor) -> Tensor:
        return T.linear(x, self.weight, self.bias)


class Dropout(Module):
    """Inverted dropout: survivors scaled by 1/(1-p) in train, identity in eval."""

    def __init__(self, p: float, rng: RngState):
        super().__init__()
        if not 0.0 <= p < 1.0:
            raise ConfigError(f"dropout p must be in [0, 1), got {p}")
        self.p = p
        self.rng = rng

    def forward(self, x: Tensor) -> Tensor:
        if not self.training or self.p == 0.0:
            return x
        keep = (self.rng.uniform(0.0, 1.0, x.shape) >= self.p).astype(x.data.dtype)
        return x * Tensor(keep / (1.0 - self.p))


class LayerNorm(Module):
    """Normalizes across the latent (last) dimension per token."""

    def __init__(self, dim: int, eps: float = 1e-5):
        super().__init__()
        dtype = T.get_default_dtype()
        self.gamma = Parameter(np.ones(dim, dtype=dtype))
        self.beta = Parameter(np.zeros(dim, dtype=dtype))
        self.eps = eps

    def forward(self, x: Tensor) -> Tensor:
        mu = x.mean(axis=-1, keepdims=True)
        centered = x - mu
        var = T.tmean(T.square(centered), axis=-1, keepdims=True)
        normed = centered / T.sqrt(var + self.eps)
        return normed * self.gamma + self.beta


class BatchNorm(Module):
    """Normalizes each (token, latent) coordinate across the B*C sample axis.

    Expects ``[B, C, *coord_shape]`` input; channels count as independent
    samples. Running statistics feed eval mode.
    """

    def __init__(self, coord_shape: tuple, eps: float = 1e-5, momentum: float = 0.1):
        super().__init__()
        coord_shape = tuple(coord_shape)
        dtype = T.get_default_dtype()
        self.gamma = Parameter(np.ones(coord_shape, dtype=dtype))
        self.beta = Parameter(np.zeros(coord_shape, dtype=dtype))
        self.eps = eps
        self.momentum = momentum
        self.coord_shape = coord_shape
        self.register_buffer("running_mean", np.zeros(coord_shape, dtype=dtype))
        self.register_buffer("running_var", np.ones(coord_shape, dtype=dtype))

    def forward(self, x: Tensor) -> Tensor:
        n_sample_axes = x.data.ndim - len(self.coord_shape)
        if x.data.shape[n_sample_axes:] != self.coord_shape:
            raise DimensionError(
                f"batch norm built for coordinates {self.coord_shape}, got input {x.shape}"
            )
        axes = tuple(range(n_sample_axes))
        if self.training:
            if x.data.shape[0] < 2:
                raise StatisticsError("batch norm in train mode needs B >= 2")
            mu = x.mean(axis=axes, keepdims=False)
            var = T.tmean(T.square(x - mu), axis=axes, keepdims=False)
            m = self.momentum
            self._buffers["running_mean"] *= 1.0 - m
            self._buffers["running_mean"] += m * mu.data
            self._buffers["running_var"] *= 1.0 - m
            self._buffers["running_var"] += m * var.data
            mean_t, var_t = mu, var
        else:
            mean_t = Tensor(self._buffers["running_mean"])
            var_t = Tensor(self._buffers["running_var"])
        normed = (x - mean_t) / T.sqrt(var_t + self.eps)
        return normed * self.gamma + self.beta


def make_norm(flavor: str, coord_shape: tuple):
    """Norm layer for a ``[B, C, T, L]`` site; flavor is "batch" or "layer"."""
    if flavor == "batch":
        return BatchNorm(coord_shape)
    if flavor == "layer":
        return LayerNorm(coord_shape[-1])
    raise ConfigError(f"unknown norm flavor: {flavor!r}")


def softmax_attention(q: Tensor, k: Tensor, v: Tensor, heads: int,
                      w_out: Tensor | None = None, b_out: Tensor | None = None,
                      return_weights: bool = False):
    """Unmasked scaled dot-product attention over the last two axes.

    ``q, k, v`` are ``[..., T, D]`` with ``D = heads * d_head``; heads are
    split internally, attended, re-concatenated, and (optionally) passed
    through the output projection.
    """
    d = q.shape[-1]
    if d % heads != 0:
        raise ConfigError(f"model dim {d} not divisible by heads {heads}")
    dh = d // heads
    lead = q.shape[:-2]
    t = q.shape[-2]

    def split(x):
        x = x.reshape(lead + (t, heads, dh))
        return x.swapaxes(-2, -3)  # [..., heads, T, dh]

    qh, kh, vh = split(q), split(k), split(v)
    scores = T.matmul(qh, kh.swapaxes(-1, -2)) * (1.0 / np.sqrt(dh))
    weights = T.softmax(scores, axis=-1)
    ctx = T.matmul(weights, vh)  # [..., heads, T, dh]
    ctx = ctx.swapaxes(-2, -3).reshape(lead + (t, d))
    out = T.linear(ctx, w_out, b_out) if w_out is not None else ctx
    if return_weights:
        return out, weights
    return out


class MultiheadSelfAttention(Module):
    """Standard unmasked multi-head self-attention with output projection."""

    def __init__(self, d_model: int, heads: int, rng: RngState):
        super().__init__()
        if d_model % heads != 0:
            raise ConfigError(f"model dim {d_model} not divisible by heads {heads}")
        self.heads = heads
        self.wq = Linear(d_model, d_model, rng)
        self.wk = Linear(d_model, d_model, rng)
        self.wv = Linear(d_model, d_model, rng)
        self.wo = Linear(d_model, d_model, rng)

    def forward(self, x: Tensor) -> Tensor:
        q, k, v = self.wq(x), self.wk(x), self.wv(x)
        return softmax_attention(q, k, v, self.heads, self.wo.weight, self.wo.bias)
