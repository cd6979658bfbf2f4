"""Per-sentence gradient training, evaluation metrics, and the epoch loop.

Training is deterministic in (corpus, config): the dev split, the per-epoch
shuffles, dropout masks, and parameter init all draw from named streams of
the one seed, so the same call produces bit-identical parameter trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core.optim import AdamState, adam_step, clip_global_norm, lr_at_epoch
from .core.rng import stream
from .core.value import backward, zero_grads
from .corpus import LABEL_ERROR, Sentence
from .errors import ConfigError, NumericError
from .lexicon import Lexicon, PinyinTable, build_vocabs
from .model import ModelConfig, Tagger
from .synth import make_synthetic  # noqa: F401  (re-export: generator lives with training)


@dataclass
class TrainConfig:
    lr0: float = 0.015
    decay: float = 0.05
    epochs: int = 50
    seed: int = 0
    dropout: float = 0.5
    variant: str = "fl-lstm-crf"
    clip_norm: float = 5.0
    hidden: int = 200
    char_emb: int = 50
    pinyin_emb: int = 50
    word_emb: int = 50
    tone_mode: bool = False
    dev_fraction: float = 0.1
    use_pinyin: Optional[bool] = None
    use_lattice: Optional[bool] = None
    # "corpus": embed only characters seen in training data; "table": embed
    # every character the pinyin table knows, so unseen characters still hit
    # a trained syllable row at inference time
    char_inventory: str = "corpus"
    # stop as soon as training-set F1 reaches this value (None: run all epochs)
    target_train_f1: Optional[float] = None

    def __post_init__(self):
        if self.char_inventory not in ("corpus", "table"):
            raise ConfigError(
                f"char_inventory must be 'corpus' or 'table', got {self.char_inventory!r}"
            )
        if self.lr0 <= 0:
            raise ConfigError(f"lr0 must be > 0, got {self.lr0}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.decay < 0:
            raise ConfigError(f"decay must be >= 0, got {self.decay}")
        if self.clip_norm <= 0:
            raise ConfigError(f"clip_norm must be > 0, got {self.clip_norm}")
        if not 0.0 <= self.dev_fraction < 1.0:
            raise ConfigError(f"dev_fraction must be in [0, 1), got {self.dev_fraction}")

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            variant=self.variant,
            char_emb=self.char_emb,
            pinyin_emb=self.pinyin_emb,
            word_emb=self.word_emb,
            hidden=self.hidden,
            dropout=self.dropout,
            tone_mode=self.tone_mode,
            use_pinyin=self.use_pinyin,
            use_lattice=self.use_lattice,
        )


@dataclass(frozen=True)
class MetricsReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    # true when a zero denominator forced precision, recall, or f1 to 0
    degenerate: bool

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "MetricsReport":
        degenerate = False
        if tp + fp == 0:
            precision, degenerate = 0.0, True
        else:
            precision = tp / (tp + fp)
        if tp + fn == 0:
            recall, degenerate = 0.0, True
        else:
            recall = tp / (tp + fn)
        if precision + recall == 0.0:
            f1 = 0.0
            degenerate = degenerate or tp == 0
        else:
            f1 = 2 * precision * recall / (precision + recall)
        return cls(tp, fp, fn, precision, recall, f1, degenerate)


def evaluate(model: Tagger, sentences: Sequence[Sentence]) -> MetricsReport:
    """Character-level counts over the error label."""
    tp = fp = fn = 0
    for sent in sentences:
        pred = model.decode(sent.chars)
        for p, g in zip(pred, sent.labels):
            if p == LABEL_ERROR and g == LABEL_ERROR:
                tp += 1
            elif p == LABEL_ERROR:
                fp += 1
            elif g == LABEL_ERROR:
                fn += 1
    return MetricsReport.from_counts(tp, fp, fn)


def evaluate_by_tag(model: Tagger, sentences: Sequence[Sentence]) -> dict[str, MetricsReport]:
    """Per-error-type reports.

    False positives carry no gold tag, so per-type precision is undefined;
    each type reuses the corpus-wide precision and combines it with its own
    recall, and the fp field stores the corpus-wide count.
    """
    overall = evaluate(model, sentences)
    per_tag: dict[str, list[int]] = {}
    for sent in sentences:
        if sent.tags is None:
            continue
        pred = model.decode(sent.chars)
        for p, g, tag in zip(pred, sent.labels, sent.tags):
            if g != LABEL_ERROR or not tag:
                continue
            counts = per_tag.setdefault(tag, [0, 0])
            counts[0 if p == LABEL_ERROR else 1] += 1
    out: dict[str, MetricsReport] = {}
    for tag, (tp, fn) in sorted(per_tag.items()):
        degenerate = tp + fn == 0
        recall = 0.0 if degenerate else tp / (tp + fn)
        p = overall.precision
        f1 = 0.0 if p + recall == 0 else 2 * p * recall / (p + recall)
        out[tag] = MetricsReport(
            tp, overall.fp, fn, p, recall, f1, degenerate or overall.degenerate
        )
    return out


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lr: float
    train_loss: float
    dev: MetricsReport
    train_f1: Optional[float] = None

    def format(self) -> str:
        parts = [
            f"epoch={self.epoch}",
            f"lr={self.lr:.6f}",
            f"train_loss={self.train_loss:.6f}",
            f"dev_precision={self.dev.precision:.4f}",
            f"dev_recall={self.dev.recall:.4f}",
            f"dev_f1={self.dev.f1:.4f}",
        ]
        if self.train_f1 is not None:
            parts.append(f"train_f1={self.train_f1:.4f}")
        return " ".join(parts)


@dataclass
class TrainResult:
    model: Tagger
    log: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = -1
    best_dev_f1: float = 0.0


def split_dev(
    sentences: Sequence[Sentence], seed: int, dev_fraction: float
) -> tuple[list[Sentence], list[Sentence]]:
    """Seeded shuffle split; dev gets the prescribed fraction (possibly none)."""
    order = stream(seed, "split").permutation(len(sentences))
    n_dev = int(len(sentences) * dev_fraction)
    if dev_fraction > 0 and len(sentences) > 1:
        n_dev = max(1, min(n_dev, len(sentences) - 1))
    else:
        n_dev = 0
    dev = [sentences[i] for i in order[:n_dev]]
    train = [sentences[i] for i in order[n_dev:]]
    return train, dev


def train(
    sentences: Sequence[Sentence],
    table: Optional[PinyinTable],
    lexicon: Lexicon,
    cfg: TrainConfig,
    log_fn=None,
) -> TrainResult:
    if not sentences:
        raise ConfigError("training corpus is empty")
    mcfg = cfg.model_config()
    seqs: list[Sequence[str]] = [s.chars for s in sentences]
    if cfg.char_inventory == "table":
        if table is None:
            raise ConfigError("char_inventory='table' needs a pinyin table")
        seqs.append(table.chars())
    char_vocab, _ = build_vocabs(seqs, table)
    model = Tagger.build(mcfg, char_vocab.symbols[2:], table, lexicon, seed=cfg.seed)

    train_sents, dev_sents = split_dev(sentences, cfg.seed, cfg.dev_fraction)
    # lattices are topology, not parameters: build once
    spans = [model.spans_for(s.chars) for s in train_sents]

    adam = AdamState()
    dropout_rng = stream(cfg.seed, "dropout")
    result = TrainResult(model=model)
    best_snapshot = model.clone_params()
    best_f1 = -1.0

    for epoch in range(cfg.epochs):
        lr = lr_at_epoch(cfg.lr0, cfg.decay, epoch)
        order = stream(cfg.seed, "shuffle", epoch).permutation(len(train_sents))
        total_loss = 0.0
        for idx in order:
            sent = train_sents[idx]
            if len(sent) == 0:
                continue
            zero_grads(model.params.values())
            loss = model.sentence_nll(
                sent.chars, sent.labels, spans=spans[idx], rng=dropout_rng
            )
            loss_val = float(loss.data[0])
            if not np.isfinite(loss_val):
                raise NumericError(
                    f"non-finite loss {loss_val} at epoch {epoch}, "
                    f"training sentence index {int(idx)}: {sent.text!r}"
                )
            total_loss += loss_val
            backward(loss)
            clip_global_norm(model.params, cfg.clip_norm)
            adam_step(model.params, adam, lr)

        train_f1 = None
        if cfg.target_train_f1 is not None:
            train_f1 = evaluate(model, train_sents).f1
        dev = (
            evaluate(model, dev_sents)
            if dev_sents
            else MetricsReport.from_counts(0, 0, 0)
        )
        record = EpochRecord(
            epoch=epoch,
            lr=lr,
            train_loss=total_loss / max(1, len(train_sents)),
            dev=dev,
            train_f1=train_f1,
        )
        result.log.append(record)
        if log_fn is not None:
            log_fn(record.format())

        if dev_sents and dev.f1 > best_f1:
            best_f1 = dev.f1
            best_snapshot = model.clone_params()
            result.best_epoch = epoch
            result.best_dev_f1 = dev.f1
        if cfg.target_train_f1 is not None and train_f1 is not None:
            if train_f1 >= cfg.target_train_f1:
                break

    if dev_sents:
        model.restore_params(best_snapshot)
    else:
        result.best_epoch = len(result.log) - 1
    return result
