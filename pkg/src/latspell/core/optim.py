"""Adam with bias correction, plus global-norm gradient clipping.

update = lr * mhat / (sqrt(vhat) + eps), the standard form: eps is added to
the square root, not under it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError
from .backend import kernels as K
from .value import Value


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: dict[str, Value], state: AdamState, lr: float) -> None:
    """One update over all params, reading each param's accumulated .grad.

    The step counter advances once per call, not once per parameter.
    """
    state.t += 1
    for name, p in params.items():
        m = state.m.get(name)
        if m is None:
            m = np.zeros_like(p.data)
            state.m[name] = m
            state.v[name] = np.zeros_like(p.data)
        v = state.v[name]
        if m.shape != p.data.shape:
            raise ShapeError(
                f"adam state for {name!r} has shape {m.shape}, param has {p.data.shape}"
            )
        K.adam_update(
            p.data.reshape(-1), p.grad.reshape(-1), m.reshape(-1), v.reshape(-1),
            state.t, lr, state.beta1, state.beta2, state.eps,
        )


def grad_global_norm(params: dict[str, Value]) -> float:
    total = 0.0
    for p in params.values():
        total += K.grad_sqnorm(p.grad.reshape(-1))
    return math.sqrt(total)


def clip_global_norm(params: dict[str, Value], max_norm: float) -> float:
    """Scale all grads so their joint L2 norm is at most max_norm.

    Returns the pre-clip norm, which training logs.
    """
    norm = grad_global_norm(params)
    if norm > max_norm and norm > 0.0:
        s = max_norm / norm
        for p in params.values():
            K.scale_(p.grad.reshape(-1), s)
    return norm


def lr_at_epoch(lr0: float, decay: float, epoch: int) -> float:
    """Inverse-time decay; epoch is 0-based, so epoch 0 trains at lr0."""
    return lr0 / (1.0 + decay * epoch)
