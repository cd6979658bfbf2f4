"""Linear-chain CRF over the two detection labels.

Label ids: T=0 (correct), F=1 (error), plus virtual START=2 and STOP=3 used
only in the transition matrix, which is indexed trans[prev, next]. The
partition function runs in log space via log_sum_exp; decoding is Viterbi
over plain numpy scores with ties broken toward the lower label id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import value as V
from .core.value import Value
from .errors import ContractError, ShapeError

LABELS = ("T", "F")
T_ID = 0
F_ID = 1
START = 2
STOP = 3
N_LABELS = len(LABELS)


def emissions(W: Value, b: Value, hs: Sequence[Value]) -> list[Value]:
    """Per-position label scores from the encoder outputs."""
    return [V.affine(W, b, h) for h in hs]


def _check(ems: Sequence[Value], trans: Value) -> int:
    if len(ems) == 0:
        raise ContractError("CRF needs at least one position")
    L = ems[0].data.shape[0]
    if trans.data.shape != (L + 2, L + 2):
        raise ShapeError(
            f"transition shape {trans.data.shape} does not fit {L} labels "
            f"(want {(L + 2, L + 2)})"
        )
    return L


def score_sequence(ems: Sequence[Value], trans: Value, labels: Sequence[int]) -> Value:
    """Path score of one labeling: transitions (START..STOP) plus emissions."""
    L = _check(ems, trans)
    if len(labels) != len(ems):
        raise ContractError(f"{len(labels)} labels for {len(ems)} positions")
    for y in labels:
        if not 0 <= y < L:
            raise ContractError(f"label id {y} out of range for {L} labels")
    s = V.add(V.pick2(trans, L, labels[0]), V.pick(ems[0], labels[0]))
    for t in range(1, len(ems)):
        s = V.add(s, V.pick2(trans, labels[t - 1], labels[t]))
        s = V.add(s, V.pick(ems[t], labels[t]))
    return V.add(s, V.pick2(trans, labels[-1], L + 1))


def log_partition(ems: Sequence[Value], trans: Value) -> Value:
    """log of the summed exp score over all label paths (forward algorithm)."""
    L = _check(ems, trans)
    alphas = [V.add(V.pick2(trans, L, j), V.pick(ems[0], j)) for j in range(L)]
    for t in range(1, len(ems)):
        alphas = [
            V.add(
                V.log_sum_exp([V.add(alphas[i], V.pick2(trans, i, j)) for i in range(L)]),
                V.pick(ems[t], j),
            )
            for j in range(L)
        ]
    return V.log_sum_exp([V.add(alphas[j], V.pick2(trans, j, L + 1)) for j in range(L)])


def nll(ems: Sequence[Value], trans: Value, labels: Sequence[int]) -> Value:
    """Sentence negative log-likelihood: log Z minus the gold path score."""
    return V.add(log_partition(ems, trans), V.negate(score_sequence(ems, trans, labels)))


@dataclass(frozen=True)
class TagPath:
    label_ids: tuple[int, ...]
    score: float


def viterbi(em: np.ndarray, trans: np.ndarray) -> TagPath:
    """Best path by score. Ties resolve to the lower label id at every
    argmax (numpy argmax returns the first maximum), so zero parameters
    decode to all-T."""
    m, L = em.shape
    if m == 0:
        raise ContractError("viterbi needs at least one position")
    if trans.shape != (L + 2, L + 2):
        raise ShapeError(
            f"transition shape {trans.shape} does not fit {L} labels (want {(L + 2, L + 2)})"
        )
    delta = trans[L, :L] + em[0]
    back = np.empty((m, L), dtype=np.int64)
    for t in range(1, m):
        cand = delta[:, None] + trans[:L, :L]  # [prev, next]
        best_prev = cand.argmax(axis=0)
        back[t] = best_prev
        delta = cand[best_prev, np.arange(L)] + em[t]
    final = delta + trans[:L, L + 1]
    last = int(final.argmax())
    path = [last]
    for t in range(m - 1, 0, -1):
        last = int(back[t, last])
        path.append(last)
    path.reverse()
    return TagPath(tuple(path), float(final.max()))


def ids_to_labels(ids: Sequence[int]) -> list[str]:
    return [LABELS[i] for i in ids]


def labels_to_ids(labels: Sequence[str]) -> list[int]:
    out = []
    for s in labels:
        try:
            out.append(LABELS.index(s))
        except ValueError:
            raise ContractError(f"unknown label {s!r}, expected one of {LABELS}") from None
    return out
