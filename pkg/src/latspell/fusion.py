"""Character/pinyin input fusion.

Each position gets a character embedding and (in the fusion variants) a
pinyin embedding. A sigmoid gate per source decides how much of each passes
through, and the gated vectors are concatenated:

    g_c = sigmoid(Wc @ xc + bc)      g_p = sigmoid(Wp @ xp + bp)
    x   = [g_c * xc ; g_p * xp]

Dropout is inverted (mask / keep_prob) and applied to embeddings only, with a
fresh mask per lookup per sentence.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .core import value as V
from .core.value import Value


def dropout_mask(rng: np.random.Generator, dim: int, p_drop: float) -> np.ndarray:
    """Inverted-dropout mask: zeros with probability p_drop, else 1/(1-p_drop)."""
    keep = 1.0 - p_drop
    return (rng.random(dim) < keep).astype(np.float64) / keep


def lookup_embedding(
    table: Value, idx: int, p_drop: float, rng: Optional[np.random.Generator]
) -> Value:
    """Row lookup, with dropout applied when an rng is supplied (training)."""
    x = V.row(table, idx)
    if rng is not None and p_drop > 0.0:
        x = V.mul_const(x, dropout_mask(rng, x.data.shape[0], p_drop))
    return x


def source_gate(W: Value, b: Value, x: Value) -> Value:
    """The per-source sigmoid gate over its own embedding."""
    return V.sigmoid(V.affine(W, b, x))


def fuse(gc: Value, xc: Value, gp: Value, xp: Value) -> Value:
    """Gated concatenation of the two sources."""
    return V.concat(V.hadamard(gc, xc), V.hadamard(gp, xp))


def fused_input(Wc: Value, bc: Value, Wp: Value, bp: Value, xc: Value, xp: Value) -> Value:
    return fuse(source_gate(Wc, bc, xc), xc, source_gate(Wp, bp, xp), xp)
