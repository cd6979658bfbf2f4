"""Vocabularies, the word trie, lattice span matching, and resource loading.

Resource formats:
  - word list: one word per line, UTF-8. Only words of length >= 2 enter the
    trie; single characters are kept around for corpus synthesis.
  - pinyin table: TSV lines "char<TAB>syllable", syllable tone-numbered
    (e.g. jiao1). Toneless mode (the default) strips the trailing digit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Sequence

from .errors import ConfigError, ParseError

PAD = "<pad>"
UNK = "<unk>"


class Vocab:
    """Symbol <-> id table. Id 0 is PAD, id 1 is UNK; unknown lookups map to 1."""

    def __init__(self, symbols: Iterable[str] = ()):
        self._syms: list[str] = [PAD, UNK]
        self._ids: dict[str, int] = {PAD: 0, UNK: 1}
        for s in symbols:
            self.add(s)

    def add(self, sym: str) -> int:
        i = self._ids.get(sym)
        if i is None:
            i = len(self._syms)
            self._syms.append(sym)
            self._ids[sym] = i
        return i

    def id(self, sym: str) -> int:
        return self._ids.get(sym, 1)

    def sym(self, i: int) -> str:
        return self._syms[i]

    def __len__(self) -> int:
        return len(self._syms)

    def __contains__(self, sym: str) -> bool:
        return sym in self._ids

    @property
    def symbols(self) -> list[str]:
        return list(self._syms)

    @classmethod
    def from_table(cls, symbols: Sequence[str]) -> "Vocab":
        """Rebuild from a serialized symbol table (must start with PAD, UNK)."""
        if len(symbols) < 2 or symbols[0] != PAD or symbols[1] != UNK:
            raise ConfigError("vocab table must start with the PAD and UNK symbols")
        v = cls()
        for s in symbols[2:]:
            v.add(s)
        return v


@dataclass(frozen=True)
class LatticeSpan:
    """A dictionary word covering characters b..e inclusive; always e > b."""

    b: int
    e: int
    word_id: int


class _TrieNode:
    __slots__ = ("children", "word_id")

    def __init__(self):
        self.children: dict[str, _TrieNode] = {}
        self.word_id = -1


class WordTrie:
    def __init__(self):
        self.root = _TrieNode()
        self.n_words = 0

    def insert(self, word: str, word_id: int) -> None:
        node = self.root
        for ch in word:
            nxt = node.children.get(ch)
            if nxt is None:
                nxt = _TrieNode()
                node.children[ch] = nxt
            node = nxt
        if node.word_id < 0:
            self.n_words += 1
        node.word_id = word_id

    def lookup(self, word: str) -> int:
        """Word id, or -1 if the exact word is absent."""
        node = self.root
        for ch in word:
            node = node.children.get(ch)
            if node is None:
                return -1
        return node.word_id

    def __contains__(self, word: str) -> bool:
        return self.lookup(word) >= 0


def match_spans(chars: Sequence[str], trie: WordTrie) -> list[LatticeSpan]:
    """All trie words occurring in chars, as spans sorted by (end, begin).

    Overlaps and nesting are kept; spans must cover at least two characters.
    """
    found: list[LatticeSpan] = []
    n = len(chars)
    for b in range(n):
        node = trie.root
        for e in range(b, n):
            node = node.children.get(chars[e])
            if node is None:
                break
            if node.word_id >= 0 and e > b:
                found.append(LatticeSpan(b, e, node.word_id))
    found.sort(key=lambda s: (s.e, s.b))
    return found


@dataclass
class Lexicon:
    trie: WordTrie
    vocab: Vocab  # ids for words of length >= 2, aligned with the trie
    words: list[str]  # every unique word from the file, original order
    n_single: int = 0
    n_double: int = 0
    n_multi: int = 0

    @property
    def multi_words(self) -> list[str]:
        return [w for w in self.words if len(w) >= 2]


def empty_lexicon() -> Lexicon:
    return Lexicon(trie=WordTrie(), vocab=Vocab(), words=[])


def build_lexicon(words: Iterable[str]) -> Lexicon:
    lex = empty_lexicon()
    seen = set()
    for w in words:
        if not w or w in seen:
            continue
        seen.add(w)
        lex.words.append(w)
        if len(w) == 1:
            lex.n_single += 1
            continue
        if len(w) == 2:
            lex.n_double += 1
        else:
            lex.n_multi += 1
        lex.trie.insert(w, lex.vocab.add(w))
    return lex


def load_word_list(path) -> Lexicon:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = [line.strip() for line in fh]
    except OSError as e:
        raise ConfigError(f"cannot read word list {path}: {e}") from e
    words = [w for w in raw if w]
    if not words:
        raise ConfigError(f"word list {path} contains no words")
    return build_lexicon(words)


class PinyinTable:
    """Character -> syllable map. tone_mode keeps the tone digit (jiao1)."""

    def __init__(self, by_char: dict[str, str], tone_mode: bool = False):
        self._toned = by_char
        self.tone_mode = tone_mode
        self._by_syllable: Optional[dict[str, list[str]]] = None

    def get(self, char: str) -> Optional[str]:
        s = self._toned.get(char)
        if s is None:
            return None
        return s if self.tone_mode else s.rstrip("0123456789")

    def __contains__(self, char: str) -> bool:
        return char in self._toned

    def __len__(self) -> int:
        return len(self._toned)

    def chars(self) -> list[str]:
        """Every mapped character, in table order."""
        return list(self._toned)

    def to_pinyin(self, chars: Sequence[str]) -> list[str]:
        """Length-preserving; unmapped characters become the UNK token."""
        return [self.get(c) or UNK for c in chars]

    def chars_by_syllable(self) -> dict[str, list[str]]:
        """Inverse index under the current tone mode, insertion-ordered."""
        if self._by_syllable is None:
            inv: dict[str, list[str]] = {}
            for ch in self._toned:
                inv.setdefault(self.get(ch), []).append(ch)
            self._by_syllable = inv
        return self._by_syllable

    def homophones(self, char: str) -> list[str]:
        """Other characters sharing this character's syllable."""
        s = self.get(char)
        if s is None:
            return []
        return [c for c in self.chars_by_syllable().get(s, []) if c != char]


def build_vocabs(
    char_seqs: Iterable[Sequence[str]],
    table: Optional[PinyinTable] = None,
) -> tuple[Vocab, Vocab]:
    """Character and pinyin vocabularies covering a corpus.

    Characters from every sequence enter the character vocabulary in sorted
    order, so rebuilding from the same corpus gives identical ids no matter
    how the sentences were ordered. Each mapped character contributes its
    syllable to the pinyin vocabulary; unmapped characters fall back to the
    UNK syllable at embedding time and add nothing here.
    """
    chars = sorted({ch for seq in char_seqs for ch in seq})
    if not chars:
        raise ConfigError("cannot build vocabularies from an empty corpus")
    char_vocab = Vocab(chars)
    pinyin_vocab = Vocab()
    if table is not None:
        for ch in chars:
            syl = table.get(ch)
            if syl is not None:
                pinyin_vocab.add(syl)
    return char_vocab, pinyin_vocab


_SYLLABLE_OK = set("abcdefghijklmnopqrstuvwxyz")


def load_pinyin_table(path, tone_mode: bool = False) -> PinyinTable:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read pinyin table {path}: {e}") from e
    by_char: dict[str, str] = {}
    for ln, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ParseError(f"{path}:{ln}: expected 'char<TAB>syllable', got {line!r}")
        char, syl = parts[0], parts[1].strip().lower()
        if len(char) != 1:
            raise ParseError(f"{path}:{ln}: key {char!r} is not a single character")
        body = syl.rstrip("0123456789")
        if not body or not set(body) <= _SYLLABLE_OK:
            raise ParseError(f"{path}:{ln}: syllable {syl!r} is not plain ASCII pinyin")
        if char in by_char:
            raise ParseError(f"{path}:{ln}: duplicate entry for {char!r}")
        by_char[char] = syl
    if not by_char:
        raise ConfigError(f"pinyin table {path} is empty")
    return PinyinTable(by_char, tone_mode=tone_mode)


def builtin_pinyin_path() -> str:
    return str(resources.files("latspell.data") / "pinyin.tsv")


def builtin_words_path() -> str:
    return str(resources.files("latspell.data") / "words.txt")
