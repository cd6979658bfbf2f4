"""Model assembly: configuration, parameters, forward passes, persistence.

The three variants lower to two switches:

    lstm-crf        use_pinyin=False  use_lattice=False
    l-lstm-crf      use_pinyin=False  use_lattice=True
    fl-lstm-crf     use_pinyin=True   use_lattice=True

Both switches can be overridden explicitly, which is how ablations and the
collapse checks are built. Every parameter is initialized from its own
named random stream, so a parameter shared by two variants gets identical
values under the same seed no matter which other parameters exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import crf, fusion, lattice
from .core import rng as rngmod
from .core import serialize
from .core.value import Value
from .errors import ConfigError
from .lexicon import (
    UNK,
    LatticeSpan,
    Lexicon,
    PinyinTable,
    Vocab,
    build_lexicon,
    match_spans,
)

VARIANTS = ("lstm-crf", "l-lstm-crf", "fl-lstm-crf")


@dataclass
class ModelConfig:
    variant: str = "fl-lstm-crf"
    char_emb: int = 50
    pinyin_emb: int = 50
    word_emb: int = 50
    hidden: int = 200
    dropout: float = 0.5
    tone_mode: bool = False
    use_pinyin: Optional[bool] = None
    use_lattice: Optional[bool] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.use_pinyin is None:
            self.use_pinyin = self.variant == "fl-lstm-crf"
        if self.use_lattice is None:
            self.use_lattice = self.variant != "lstm-crf"
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")

    @property
    def x_dim(self) -> int:
        return self.char_emb + (self.pinyin_emb if self.use_pinyin else 0)


def _param_shapes(cfg: ModelConfig, n_chars: int, n_pinyins: int, n_words: int):
    """Name -> shape, in serialization order."""
    h, x = cfg.hidden, cfg.x_dim
    shapes: dict[str, tuple[int, ...]] = {"embed.char": (n_chars, cfg.char_emb)}
    if cfg.use_pinyin:
        shapes["embed.pinyin"] = (n_pinyins, cfg.pinyin_emb)
        shapes["fusion.char.W"] = (cfg.char_emb, cfg.char_emb)
        shapes["fusion.char.b"] = (cfg.char_emb,)
        shapes["fusion.pinyin.W"] = (cfg.pinyin_emb, cfg.pinyin_emb)
        shapes["fusion.pinyin.b"] = (cfg.pinyin_emb,)
    if cfg.use_lattice:
        shapes["embed.word"] = (n_words, cfg.word_emb)
    for d in ("fwd", "bwd"):
        shapes[f"lstm.{d}.W"] = (3 * h, x + h)
        shapes[f"lstm.{d}.b"] = (3 * h,)
    if cfg.use_lattice:
        for d in ("fwd", "bwd"):
            shapes[f"lattice.{d}.W"] = (2 * h, cfg.word_emb + h)
            shapes[f"lattice.{d}.b"] = (2 * h,)
        for d in ("fwd", "bwd"):
            shapes[f"gate.{d}.W"] = (h, x + h)
            shapes[f"gate.{d}.b"] = (h,)
    shapes["crf.emit.W"] = (crf.N_LABELS, 2 * h)
    shapes["crf.emit.b"] = (crf.N_LABELS,)
    shapes["crf.trans"] = (crf.N_LABELS + 2, crf.N_LABELS + 2)
    return shapes


def init_params(cfg: ModelConfig, n_chars: int, n_pinyins: int, n_words: int, seed: int):
    """Weights and embeddings uniform in +-sqrt(3/fan_in); biases zero."""
    params: dict[str, Value] = {}
    for name, shape in _param_shapes(cfg, n_chars, n_pinyins, n_words).items():
        if len(shape) == 1:
            data = np.zeros(shape)
        else:
            bound = np.sqrt(3.0 / shape[-1])
            data = rngmod.stream(seed, "init", name).uniform(-bound, bound, size=shape)
        params[name] = Value(data, op=f"param:{name}")
    return params


class Tagger:
    """A trained (or initializing) detector bound to its vocabularies."""

    def __init__(
        self,
        cfg: ModelConfig,
        char_vocab: Vocab,
        pinyin_vocab: Vocab,
        lexicon: Lexicon,
        syllable_of_char: list[str],
        params: dict[str, Value],
    ):
        self.cfg = cfg
        self.char_vocab = char_vocab
        self.pinyin_vocab = pinyin_vocab
        self.lexicon = lexicon
        self.syllable_of_char = syllable_of_char  # aligned with char vocab ids
        self.params = params

    # ------------------------------------------------------------ build

    @classmethod
    def build(
        cls,
        cfg: ModelConfig,
        chars: Sequence[str],
        table: Optional[PinyinTable],
        lexicon: Lexicon,
        seed: int,
    ) -> "Tagger":
        """Create a fresh model whose char vocab covers `chars` in order."""
        char_vocab = Vocab(chars)
        syllable_of_char = []
        pinyin_vocab = Vocab()
        for i in range(len(char_vocab)):
            ch = char_vocab.sym(i)
            syl = (table.get(ch) if table is not None and i >= 2 else None) or UNK
            syllable_of_char.append(syl)
            if syl != UNK:
                pinyin_vocab.add(syl)
        params = init_params(cfg, len(char_vocab), len(pinyin_vocab), len(lexicon.vocab), seed)
        return cls(cfg, char_vocab, pinyin_vocab, lexicon, syllable_of_char, params)

    # ---------------------------------------------------------- forward

    def spans_for(self, chars: Sequence[str]) -> list[LatticeSpan]:
        if not self.cfg.use_lattice:
            return []
        return match_spans(chars, self.lexicon.trie)

    def _direction_params(self, d: str) -> lattice.DirectionParams:
        p = self.params
        if self.cfg.use_lattice:
            return lattice.DirectionParams(
                W=p[f"lstm.{d}.W"], b=p[f"lstm.{d}.b"],
                lat_W=p[f"lattice.{d}.W"], lat_b=p[f"lattice.{d}.b"],
                gate_W=p[f"gate.{d}.W"], gate_b=p[f"gate.{d}.b"],
            )
        return lattice.DirectionParams(W=p[f"lstm.{d}.W"], b=p[f"lstm.{d}.b"])

    def _inputs(
        self, chars: Sequence[str], rng: Optional[np.random.Generator]
    ) -> list[Value]:
        """Per-position fused inputs. rng enables dropout (training mode)."""
        p = self.params
        drop = self.cfg.dropout
        xs = []
        for ch in chars:
            cid = self.char_vocab.id(ch)
            xc = fusion.lookup_embedding(p["embed.char"], cid, drop, rng)
            if self.cfg.use_pinyin:
                syl = self.syllable_of_char[cid] if cid > 1 else UNK
                xp = fusion.lookup_embedding(
                    p["embed.pinyin"], self.pinyin_vocab.id(syl), drop, rng
                )
                xs.append(
                    fusion.fused_input(
                        p["fusion.char.W"], p["fusion.char.b"],
                        p["fusion.pinyin.W"], p["fusion.pinyin.b"],
                        xc, xp,
                    )
                )
            else:
                xs.append(xc)
        return xs

    def encode(
        self,
        chars: Sequence[str],
        spans: Sequence[LatticeSpan],
        rng: Optional[np.random.Generator] = None,
        fwd_trace: Optional[list[lattice.StepTrace]] = None,
        bwd_trace: Optional[list[lattice.StepTrace]] = None,
    ) -> list[Value]:
        """Bidirectional hidden states for one sentence."""
        xs = self._inputs(chars, rng)
        word_embs: dict[LatticeSpan, Value] = {}
        if self.cfg.use_lattice:
            for s in spans:
                word_embs[s] = fusion.lookup_embedding(
                    self.params["embed.word"], s.word_id, self.cfg.dropout, rng
                )
        return lattice.run_bilstm(
            self._direction_params("fwd"), self._direction_params("bwd"),
            xs, spans, word_embs, fwd_trace, bwd_trace,
        )

    def emissions(self, hs: Sequence[Value]) -> list[Value]:
        return crf.emissions(self.params["crf.emit.W"], self.params["crf.emit.b"], hs)

    def sentence_nll(
        self,
        chars: Sequence[str],
        labels: Sequence[str],
        spans: Optional[Sequence[LatticeSpan]] = None,
        rng: Optional[np.random.Generator] = None,
    ) -> Value:
        if spans is None:
            spans = self.spans_for(chars)
        ems = self.emissions(self.encode(chars, spans, rng=rng))
        return crf.nll(ems, self.params["crf.trans"], crf.labels_to_ids(labels))

    def decode(
        self, chars: Sequence[str], spans: Optional[Sequence[LatticeSpan]] = None
    ) -> list[str]:
        """Most likely label per character, dropout off."""
        if len(chars) == 0:
            return []
        if spans is None:
            spans = self.spans_for(chars)
        ems = self.emissions(self.encode(chars, spans))
        em = np.stack([e.data for e in ems])
        path = crf.viterbi(em, self.params["crf.trans"].data)
        return crf.ids_to_labels(path.label_ids)

    # ------------------------------------------------------ persistence

    def save(self, path) -> None:
        tensors = {name: v.data for name, v in self.params.items()}
        c = self.cfg
        conf = [
            f"variant={c.variant}",
            f"char_emb={c.char_emb}",
            f"pinyin_emb={c.pinyin_emb}",
            f"word_emb={c.word_emb}",
            f"hidden={c.hidden}",
            f"dropout={c.dropout}",
            f"tone_mode={int(c.tone_mode)}",
            f"use_pinyin={int(c.use_pinyin)}",
            f"use_lattice={int(c.use_lattice)}",
        ]
        tables = {
            "config": conf,
            "vocab.char": self.char_vocab.symbols,
            "vocab.pinyin": self.pinyin_vocab.symbols,
            "vocab.word": self.lexicon.vocab.symbols,
            "pinyin.by_char_id": self.syllable_of_char,
        }
        serialize.save_model(path, tensors, tables)

    @classmethod
    def load(cls, path) -> "Tagger":
        tensors, tables = serialize.load_model(path)
        for key in ("config", "vocab.char", "vocab.pinyin", "vocab.word", "pinyin.by_char_id"):
            if key not in tables:
                raise ConfigError(f"{path}: model file lacks the {key!r} table")
        conf: dict[str, str] = {}
        for entry in tables["config"]:
            k, _, v = entry.partition("=")
            conf[k] = v
        try:
            cfg = ModelConfig(
                variant=conf["variant"],
                char_emb=int(conf["char_emb"]),
                pinyin_emb=int(conf["pinyin_emb"]),
                word_emb=int(conf["word_emb"]),
                hidden=int(conf["hidden"]),
                dropout=float(conf["dropout"]),
                tone_mode=bool(int(conf["tone_mode"])),
                use_pinyin=bool(int(conf["use_pinyin"])),
                use_lattice=bool(int(conf["use_lattice"])),
            )
        except (KeyError, ValueError) as e:
            raise ConfigError(f"{path}: bad config table ({e})") from e
        char_vocab = Vocab.from_table(tables["vocab.char"])
        pinyin_vocab = Vocab.from_table(tables["vocab.pinyin"])
        lexicon = build_lexicon(tables["vocab.word"][2:])
        syllables = tables["pinyin.by_char_id"]
        if len(syllables) != len(char_vocab):
            raise ConfigError(
                f"{path}: pinyin.by_char_id has {len(syllables)} entries "
                f"for {len(char_vocab)} chars"
            )
        expect = _param_shapes(cfg, len(char_vocab), len(pinyin_vocab), len(lexicon.vocab))
        params: dict[str, Value] = {}
        for name, shape in expect.items():
            if name not in tensors:
                raise ConfigError(f"{path}: missing tensor {name!r}")
            if tensors[name].shape != shape:
                raise ConfigError(
                    f"{path}: tensor {name!r} has shape {tensors[name].shape}, want {shape}"
                )
            params[name] = Value(tensors[name], op=f"param:{name}")
        return cls(cfg, char_vocab, pinyin_vocab, lexicon, syllables, params)

    def clone_params(self) -> dict[str, np.ndarray]:
        return {name: v.data.copy() for name, v in self.params.items()}

    def restore_params(self, snapshot: dict[str, np.ndarray]) -> None:
        for name, arr in snapshot.items():
            self.params[name].data[...] = arr
