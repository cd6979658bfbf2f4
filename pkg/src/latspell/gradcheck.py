"""Model-level finite-difference gradient verification.

Builds a deliberately tiny model (hidden size 8) over a fixed miniature
vocabulary, sums the sequence loss over a batch of seeded random sentences,
and compares every element of every parameter gradient against central
differences.  Dropout is forced off: the loss must be a deterministic
function of the parameters for the difference quotient to mean anything.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core.rng import stream
from .core.value import backward, zero_grads
from .errors import ConfigError
from .lexicon import PinyinTable, build_lexicon
from .model import VARIANTS, ModelConfig, Tagger

# relative error floor: keeps near-zero gradients from inflating the ratio
REL_FLOOR = 1e-3

FIXTURE_TABLE = {
    "那": "na4", "哪": "na3", "里": "li3", "鲤": "li3",
    "大": "da4", "头": "tou2", "问": "wen4", "好": "hao3",
}
FIXTURE_WORDS = ["那里", "哪里", "大头", "问好", "里头"]


@dataclass(frozen=True)
class ParamCheck:
    name: str
    n_elements: int
    max_rel_err: float
    worst_index: tuple[int, ...]
    ok: bool

    def format(self) -> str:
        state = "ok" if self.ok else "FAIL"
        return (
            f"{self.name}: max_rel_err={self.max_rel_err:.3e} "
            f"at {self.worst_index} over {self.n_elements} elements: {state}"
        )


@dataclass
class GradCheckReport:
    variant: str
    seed: int
    threshold: float
    checks: list[ParamCheck]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def max_rel_err(self) -> float:
        return max((c.max_rel_err for c in self.checks), default=0.0)

    def format(self) -> str:
        lines = [
            f"variant={self.variant} seed={self.seed} threshold={self.threshold:.1e}"
        ]
        lines += [c.format() for c in self.checks]
        lines.append(
            f"{'PASS' if self.ok else 'FAIL'}: max_rel_err={self.max_rel_err:.3e}"
        )
        return "\n".join(lines)


def fixture_model(variant: str, seed: int, hidden: int = 8, emb: int = 4):
    """Tiny model plus seeded random sentences (len <= 5, <= 3 spans each)."""
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    table = PinyinTable(dict(FIXTURE_TABLE))
    lexicon = build_lexicon(list(FIXTURE_WORDS))
    cfg = ModelConfig(
        variant=variant,
        char_emb=emb,
        pinyin_emb=emb,
        word_emb=emb,
        hidden=hidden,
        dropout=0.0,
    )
    chars = sorted(FIXTURE_TABLE)
    model = Tagger.build(cfg, chars, table, lexicon, seed=seed)

    rng = stream(seed, "gradcheck", "sentences")
    sentences = []
    while len(sentences) < 10:
        n = int(rng.integers(1, 6))
        sent_chars = [chars[int(rng.integers(len(chars)))] for _ in range(n)]
        if len(model.spans_for(sent_chars)) > 3:
            continue
        labels = ["F" if rng.random() < 0.3 else "T" for _ in range(n)]
        sentences.append((sent_chars, labels))
    return model, sentences


def check_model_gradients(
    variant: str = "fl-lstm-crf",
    seed: int = 0,
    h: float = 1e-5,
    threshold: float = 1e-4,
) -> GradCheckReport:
    model, sentences = fixture_model(variant, seed)
    span_cache = [model.spans_for(cs) for cs, _ in sentences]

    def total_loss() -> float:
        total = 0.0
        for (cs, labels), spans in zip(sentences, span_cache):
            total += float(model.sentence_nll(cs, labels, spans=spans).data[0])
        return total

    zero_grads(model.params.values())
    for (cs, labels), spans in zip(sentences, span_cache):
        backward(model.sentence_nll(cs, labels, spans=spans))

    checks = []
    for name, param in model.params.items():
        flat = param.data.reshape(-1)
        grad = param.grad.reshape(-1)
        worst = 0.0
        worst_j = 0
        for j in range(flat.size):
            keep = flat[j]
            flat[j] = keep + h
            up = total_loss()
            flat[j] = keep - h
            down = total_loss()
            flat[j] = keep
            fd = (up - down) / (2.0 * h)
            rel = abs(grad[j] - fd) / max(abs(grad[j]), abs(fd), REL_FLOOR)
            if rel > worst:
                worst, worst_j = rel, j
        checks.append(
            ParamCheck(
                name=name,
                n_elements=flat.size,
                max_rel_err=worst,
                worst_index=tuple(int(k) for k in np.unravel_index(worst_j, param.data.shape)),
                ok=worst < threshold,
            )
        )
    return GradCheckReport(variant=variant, seed=seed, threshold=threshold, checks=checks)
