"""Seeded synthetic spelling-error corpora.

Sentences are word chains drawn from a lexicon: a small Markov process over
hashed word classes picks which cluster the next word comes from, a Zipf
weighting inside each cluster decides the word, and single-character fillers
are sprinkled between words.  Characters are then corrupted at a given rate
by swapping in a character that (a) shares the toneless syllable, (b) has a
syllable one edit away, or (c) comes from the character's confusion set, the
way a shape look-alike would.  Confusion sets are a fixed table derived from
the lexicon: a small pool of frequently-confused characters, each source
character mapping to the same few partners every time, mirroring how real
visual confusions concentrate on a handful of glyphs.  Each corruption is
labelled F and tagged with the relation that actually holds between the
original and the replacement, so a swap that was attempted as "near" but
landed on a homophone is tagged as the homophone it is.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .corpus import LABEL_CORRECT, LABEL_ERROR, Sentence
from .core.rng import stream
from .errors import ConfigError
from .lexicon import Lexicon, PinyinTable

TAG_HOMOPHONE = "homophone"
TAG_NEAR = "near"
TAG_OTHER = "other"


@lru_cache(maxsize=None)
def edit_distance(a: str, b: str) -> int:
    if a == b:
        return 0
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[-1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def relation_tag(syl_orig: str, syl_new: str) -> str:
    if syl_new == syl_orig:
        return TAG_HOMOPHONE
    if edit_distance(syl_orig, syl_new) == 1:
        return TAG_NEAR
    return TAG_OTHER


@dataclass
class SynthConfig:
    n_sentences: int = 100
    error_rate: float = 0.3
    min_words: int = 3
    max_words: int = 8
    filler_rate: float = 0.15
    # probability that a homophone swap prefers a replacement that still
    # forms a valid lexicon word (misleading lattice evidence)
    pair_bias: float = 0.3
    mode_weights: tuple[float, float, float] = (0.55, 0.2, 0.25)
    n_classes: int = 4
    stickiness: float = 0.8
    zipf_exponent: float = 1.1

    def __post_init__(self):
        if self.n_sentences < 1:
            raise ConfigError(f"n_sentences must be >= 1, got {self.n_sentences}")
        if not 0.0 <= self.error_rate <= 1.0:
            raise ConfigError(f"error_rate must be in [0, 1], got {self.error_rate}")
        if not 1 <= self.min_words <= self.max_words:
            raise ConfigError(
                f"need 1 <= min_words <= max_words, got {self.min_words}..{self.max_words}"
            )
        if min(self.mode_weights) < 0 or sum(self.mode_weights) <= 0:
            raise ConfigError(f"bad mode_weights {self.mode_weights}")


class _Sampler:
    """All randomness flows through one generator in a fixed call order."""

    def __init__(self, table: PinyinTable, lexicon: Lexicon, cfg: SynthConfig, seed: int):
        self.table = table
        self.lexicon = lexicon
        self.cfg = cfg
        self.rng = stream(seed, "synth")

        self.words = sorted(lexicon.multi_words)
        if not self.words:
            raise ConfigError("synthetic generator needs a lexicon with multi-character words")
        singles = sorted(w for w in lexicon.words if len(w) == 1)
        self.fillers = singles or sorted({ch for w in self.words for ch in w})

        # frequency rank is a seeded shuffle; Zipf weight follows the rank
        order = self.rng.permutation(len(self.words))
        ranks = np.empty(len(self.words), dtype=np.int64)
        ranks[order] = np.arange(len(self.words))
        weights = 1.0 / np.power(ranks + 1.0, cfg.zipf_exponent)

        self.class_of = np.array(
            [zlib.crc32(w.encode("utf-8")) % cfg.n_classes for w in self.words]
        )
        self.class_members: list[np.ndarray] = []
        self.class_weights: list[np.ndarray] = []
        for c in range(cfg.n_classes):
            members = np.flatnonzero(self.class_of == c)
            if members.size == 0:
                continue
            w = weights[members]
            self.class_members.append(members)
            self.class_weights.append(w / w.sum())
        self.n_live_classes = len(self.class_members)

        self.by_syllable = table.chars_by_syllable()
        self.syllables = sorted(s for s in self.by_syllable if s != "<unk>")
        self._near_cache: dict[str, tuple[str, ...]] = {}

        # visual-confusion table: a small pool of frequently-confused
        # characters taken from the lexicon's own inventory, stable-hash
        # ranked so the same table holds across corpora and seeds
        active = sorted({ch for w in self.words for ch in w} | set(self.fillers))
        ranked = sorted(active, key=lambda c: zlib.crc32(("pool:" + c).encode("utf-8")))
        self.confusion_pool = [c for c in ranked if table.get(c) is not None][:50]
        self._confusion: dict[str, tuple[str, ...]] = {}

    def near_syllables(self, syl: str) -> tuple[str, ...]:
        hit = self._near_cache.get(syl)
        if hit is None:
            hit = tuple(t for t in self.syllables if t != syl and edit_distance(syl, t) == 1)
            self._near_cache[syl] = hit
        return hit

    def choice(self, seq):
        return seq[int(self.rng.integers(len(seq)))]

    # ----------------------------------------------------------- assembly

    def sample_words(self) -> list[str]:
        cfg = self.cfg
        k = int(self.rng.integers(cfg.min_words, cfg.max_words + 1))
        cls = int(self.rng.integers(self.n_live_classes))
        out = []
        for _ in range(k):
            if self.rng.random() >= cfg.stickiness:
                cls = int(self.rng.integers(self.n_live_classes))
            idx = self.rng.choice(self.class_members[cls], p=self.class_weights[cls])
            out.append(self.words[int(idx)])
        return out

    def assemble(self) -> list[str]:
        """Word tokens with fillers interleaved; keeps word boundaries."""
        tokens = []
        for w in self.sample_words():
            if tokens and self.rng.random() < self.cfg.filler_rate:
                tokens.append(self.choice(self.fillers))
            tokens.append(w)
        return tokens

    # --------------------------------------------------------- corruption

    def _homophone_candidates(self, ch: str, token: str, pos: int) -> list[str]:
        syl = self.table.get(ch)
        fam = [c for c in self.by_syllable.get(syl, ()) if c != ch]
        if not fam:
            return []
        if len(token) > 1:
            valid = [c for c in fam if token[:pos] + c + token[pos + 1 :] in self.lexicon.trie]
            plain = [c for c in fam if c not in valid]
            pick_valid = valid and (not plain or self.rng.random() < self.cfg.pair_bias)
            return valid if pick_valid else (plain or valid)
        return fam

    def _near_candidates(self, ch: str) -> list[str]:
        syl = self.table.get(ch)
        near = self.near_syllables(syl)
        if not near:
            return []
        return list(self.by_syllable[self.choice(near)])

    def confusion_set(self, ch: str) -> tuple[str, ...]:
        """The fixed look-alike partners this character misspells to."""
        hit = self._confusion.get(ch)
        if hit is None:
            syl = self.table.get(ch)
            ok = [
                c for c in self.confusion_pool
                if c != ch and edit_distance(self.table.get(c), syl) >= 2
            ]
            ok.sort(key=lambda c: zlib.crc32((ch + c).encode("utf-8")))
            hit = tuple(ok[:2])
            self._confusion[ch] = hit
        return hit

    def _other_candidates(self, ch: str) -> list[str]:
        return list(self.confusion_set(ch))

    def corrupt_char(self, ch: str, token: str, pos: int) -> Optional[str]:
        if self.table.get(ch) is None:
            return None
        w = np.asarray(self.cfg.mode_weights, dtype=np.float64)
        mode = int(self.rng.choice(3, p=w / w.sum()))
        for m in (mode, (mode + 1) % 3, (mode + 2) % 3):  # fallback chain
            if m == 0:
                cands = self._homophone_candidates(ch, token, pos)
            elif m == 1:
                cands = self._near_candidates(ch)
            else:
                cands = self._other_candidates(ch)
            if cands:
                return self.choice(cands)
        return None

    def sentence(self) -> Sentence:
        chars: list[str] = []
        labels: list[str] = []
        tags: list[str] = []
        for token in self.assemble():
            for pos, ch in enumerate(token):
                new = None
                if self.rng.random() < self.cfg.error_rate:
                    new = self.corrupt_char(ch, token, pos)
                if new is None:
                    chars.append(ch)
                    labels.append(LABEL_CORRECT)
                    tags.append("")
                else:
                    chars.append(new)
                    labels.append(LABEL_ERROR)
                    tags.append(relation_tag(self.table.get(ch), self.table.get(new)))
        return Sentence(
            tuple(chars), tuple(labels), tuple(tags) if any(tags) else None
        )


def make_synthetic(
    table: PinyinTable,
    lexicon: Lexicon,
    n_sentences: int,
    seed: int,
    error_rate: float,
    **knobs,
) -> list[Sentence]:
    if len(table) == 0:
        raise ConfigError("synthetic generator needs a non-empty pinyin table")
    cfg = SynthConfig(n_sentences=n_sentences, error_rate=error_rate, **knobs)
    sampler = _Sampler(table, lexicon, cfg, seed)
    return [sampler.sentence() for _ in range(cfg.n_sentences)]
