"""The word-lattice LSTM recurrence.

Character cells are coupled-gate LSTM cells (input gate i = 1 - f, so cell
state is a convex blend when no words end at the position):

    [z_f ; z_o ; z_c] = W @ [x_e ; h_prev] + b
    f = sigmoid(z_f)    i = 1 - f    o = sigmoid(z_o)    ct = tanh(z_c)

Every dictionary word covering characters b..e adds a word cell with no
output gate, fed by the word embedding and the state at the span begin:

    [y_f ; y_c] = W_lat @ [x_w ; h_b] + b_lat
    c_w = sigmoid(y_f) * c_b + (1 - sigmoid(y_f)) * tanh(y_c)

Each word cell gets an input gate over [x_e ; c_w]. When words end at e the
cell state is a normalized blend of the char candidate and the word cells,
where the blend weights are a per-dimension softmax over the raw gate logits
(the char input logit being -z_f, consistent with i = sigmoid(-z_f)):

    alpha_0, alpha_1.. = softmax(-z_f, g_1, .., g_K)    per dimension
    c_e = alpha_0 * ct + sum_k alpha_k * c_w_k

With no words ending at e the plain recurrence c_e = f * c_prev + i * ct is
used. Either way h_e = o * tanh(c_e). The backward direction runs the same
machinery right to left: a span (b, e) is consumed at b and its word cell
reads the state at e.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import value as V
from .core.value import Value
from .errors import ContractError
from .lexicon import LatticeSpan


@dataclass
class DirectionParams:
    """Weights for one scan direction. Lattice members are None outside
    lattice variants."""

    W: Value
    b: Value
    lat_W: Optional[Value] = None
    lat_b: Optional[Value] = None
    gate_W: Optional[Value] = None
    gate_b: Optional[Value] = None

    @property
    def hidden(self) -> int:
        return self.W.data.shape[0] // 3


@dataclass
class StepState:
    c: Value
    h: Value


@dataclass
class LatticeCell:
    """A word cell offered to the character cell at position consume_at."""

    span: LatticeSpan
    consume_at: int
    c: Value
    gate: Value
    gate_logit: Value


@dataclass
class StepTrace:
    """Per-position gate snapshot, recorded for diagnostics and invariants."""

    pos: int
    f: np.ndarray
    i: np.ndarray
    alphas: Optional[list[np.ndarray]]  # None when no words end here


def initial_state(hidden: int) -> StepState:
    return StepState(Value(np.zeros(hidden)), Value(np.zeros(hidden)))


def word_cell(p: DirectionParams, x_w: Value, src: StepState) -> Value:
    """The output-gate-free word memory cell for one span."""
    h = p.hidden
    z = V.affine_pair(p.lat_W, p.lat_b, x_w, src.h)
    f = V.sigmoid(V.vslice(z, 0, h))
    i = V.one_minus(f)
    ct = V.tanh(V.vslice(z, h, 2 * h))
    return V.add(V.hadamard(f, src.c), V.hadamard(i, ct))


def lattice_gate(p: DirectionParams, x_e: Value, c_w: Value) -> tuple[Value, Value]:
    """Input gate for one word cell. Returns (sigmoid gate, raw logit); the
    raw logit is what the normalization consumes."""
    logit = V.affine_pair(p.gate_W, p.gate_b, x_e, c_w)
    return V.sigmoid(logit), logit


def normalize_gates(char_logit: Value, word_logits: Sequence[Value]) -> list[Value]:
    """Blend weights for [char candidate, word cells]: per-dimension softmax
    over the raw logits. They sum to one at every dimension."""
    return V.gate_softmax([char_logit, *word_logits])


def lattice_step(
    p: DirectionParams,
    x_e: Value,
    prev: StepState,
    cells: Sequence[LatticeCell],
    pos: Optional[int] = None,
    trace: Optional[list[StepTrace]] = None,
) -> StepState:
    """One character position. cells are the word cells consumed here."""
    if pos is not None:
        for cell in cells:
            if cell.consume_at != pos:
                raise ContractError(
                    f"word cell for span ({cell.span.b}, {cell.span.e}) is consumed "
                    f"at {cell.consume_at}, not at position {pos}"
                )
    h = p.hidden
    z = V.affine_pair(p.W, p.b, x_e, prev.h)
    z_f = V.vslice(z, 0, h)
    f = V.sigmoid(z_f)
    i = V.one_minus(f)
    o = V.sigmoid(V.vslice(z, h, 2 * h))
    ct = V.tanh(V.vslice(z, 2 * h, 3 * h))
    if cells:
        alphas = normalize_gates(V.negate(z_f), [cell.gate_logit for cell in cells])
        c = V.hadamard(alphas[0], ct)
        for a, cell in zip(alphas[1:], cells):
            c = V.add(c, V.hadamard(a, cell.c))
    else:
        alphas = None
        c = V.add(V.hadamard(f, prev.c), V.hadamard(i, ct))
    h_out = V.hadamard(o, V.tanh(c))
    if trace is not None:
        trace.append(
            StepTrace(
                pos=-1 if pos is None else pos,
                f=f.data.copy(),
                i=i.data.copy(),
                alphas=None if alphas is None else [a.data.copy() for a in alphas],
            )
        )
    return StepState(c, h_out)


def run_direction(
    p: DirectionParams,
    xs: Sequence[Value],
    spans: Sequence[LatticeSpan],
    word_embs: dict[LatticeSpan, Value],
    reverse: bool,
    trace: Optional[list[StepTrace]] = None,
) -> list[StepState]:
    """Scan one direction over the sentence; states come back in text order.

    Forward consumes a span at its end, reading the state recorded at its
    begin; reverse consumes at the begin, reading the state at its end.
    """
    m = len(xs)
    by_consume: dict[int, list[LatticeSpan]] = {}
    if p.lat_W is not None:
        for s in spans:
            by_consume.setdefault(s.b if reverse else s.e, []).append(s)
        for group in by_consume.values():
            group.sort(key=lambda s: (s.b, s.e))
    states: list[Optional[StepState]] = [None] * m
    state = initial_state(p.hidden)
    order = range(m - 1, -1, -1) if reverse else range(m)
    for pos in order:
        cells = []
        for s in by_consume.get(pos, ()):
            src = states[s.e] if reverse else states[s.b]
            c_w = word_cell(p, word_embs[s], src)
            gate, logit = lattice_gate(p, xs[pos], c_w)
            cells.append(LatticeCell(s, pos, c_w, gate, logit))
        state = lattice_step(p, xs[pos], state, cells, pos=pos, trace=trace)
        states[pos] = state
    return states  # type: ignore[return-value]


def run_bilstm(
    fwd: DirectionParams,
    bwd: DirectionParams,
    xs: Sequence[Value],
    spans: Sequence[LatticeSpan],
    word_embs: dict[LatticeSpan, Value],
    fwd_trace: Optional[list[StepTrace]] = None,
    bwd_trace: Optional[list[StepTrace]] = None,
) -> list[Value]:
    """Bidirectional pass; h_e = [forward h_e ; backward h_e]."""
    fs = run_direction(fwd, xs, spans, word_embs, reverse=False, trace=fwd_trace)
    bs = run_direction(bwd, xs, spans, word_embs, reverse=True, trace=bwd_trace)
    return [V.concat(f.h, b.h) for f, b in zip(fs, bs)]
