"""Reading and writing labelled character corpora.

The on-disk format is one character per line, "CHAR LABEL" separated by a
single space, with an optional third field naming the error type for that
character.  Sentences are separated by blank lines.  Files are UTF-8 with
LF line endings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import ConfigError, ParseError

LABEL_CORRECT = "T"
LABEL_ERROR = "F"

DEFAULT_TERMINATORS = "。！？"


@dataclass(frozen=True)
class Sentence:
    chars: tuple[str, ...]
    labels: tuple[str, ...]
    # Per-character error-type tags ("" where untagged); None when the
    # sentence carried no tag column at all.
    tags: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if len(self.chars) != len(self.labels):
            raise ParseError(
                f"sentence has {len(self.chars)} chars but {len(self.labels)} labels"
            )
        if self.tags is not None and len(self.tags) != len(self.chars):
            raise ParseError(
                f"sentence has {len(self.chars)} chars but {len(self.tags)} tags"
            )

    def __len__(self) -> int:
        return len(self.chars)

    @property
    def text(self) -> str:
        return "".join(self.chars)

    def pinyins(self, table) -> tuple[str, ...]:
        """Parallel syllable tokens under `table` (UNK where unmapped).

        Derived on demand rather than stored: a saved model carries its own
        frozen character->syllable alignment, and a stored copy here could
        silently disagree with it.
        """
        return tuple(table.to_pinyin(self.chars))

    @property
    def n_errors(self) -> int:
        return sum(1 for lb in self.labels if lb == LABEL_ERROR)


def parse_corpus(text: str) -> list[Sentence]:
    sentences: list[Sentence] = []
    chars: list[str] = []
    labels: list[str] = []
    tags: list[str] = []
    saw_tag = False

    def flush():
        nonlocal chars, labels, tags, saw_tag
        if chars:
            sentences.append(
                Sentence(tuple(chars), tuple(labels), tuple(tags) if saw_tag else None)
            )
        chars, labels, tags, saw_tag = [], [], [], False

    for lineno, line in enumerate(text.split("\n"), start=1):
        if line.strip() == "":
            flush()
            continue
        fields = line.split(" ")
        if len(fields) not in (2, 3):
            raise ParseError(
                f"line {lineno}: expected 'CHAR LABEL' or 'CHAR LABEL TAG', got {line!r}"
            )
        ch, label = fields[0], fields[1]
        if len(ch) != 1:
            raise ParseError(f"line {lineno}: first field must be a single character, got {ch!r}")
        if label not in (LABEL_CORRECT, LABEL_ERROR):
            raise ParseError(f"line {lineno}: label must be T or F, got {label!r}")
        tag = fields[2] if len(fields) == 3 else ""
        if len(fields) == 3 and not tag:
            raise ParseError(f"line {lineno}: empty tag field")
        chars.append(ch)
        labels.append(label)
        tags.append(tag)
        if tag:
            saw_tag = True
    flush()
    return sentences


def serialize_corpus(sentences: Iterable[Sentence]) -> str:
    blocks = []
    for sent in sentences:
        lines = []
        for i, (ch, label) in enumerate(zip(sent.chars, sent.labels)):
            tag = sent.tags[i] if sent.tags is not None else ""
            lines.append(f"{ch} {label} {tag}" if tag else f"{ch} {label}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n" if blocks else ""


def load_corpus(path) -> list[Sentence]:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read corpus {path}: {e}") from e
    try:
        return parse_corpus(text)
    except ParseError as e:
        raise ParseError(f"{path}: {e}") from e


def save_corpus(path, sentences: Iterable[Sentence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_corpus(sentences))


def split_sentences(raw: str, terminators: str = DEFAULT_TERMINATORS) -> list[str]:
    """Split running text into sentences, each keeping its closing terminator."""
    out: list[str] = []
    buf: list[str] = []
    for ch in raw:
        if ch in "\r\n":
            continue
        buf.append(ch)
        if ch in terminators:
            piece = "".join(buf).strip()
            if piece:
                out.append(piece)
            buf = []
    tail = "".join(buf).strip()
    if tail:
        out.append(tail)
    return out


@dataclass(frozen=True)
class CorpusStats:
    n_sentences: int
    n_chars: int
    n_errors: int
    error_rate: float
    max_len: int
    tag_counts: dict[str, int]


def corpus_stats(sentences: list[Sentence]) -> CorpusStats:
    n_chars = sum(len(s) for s in sentences)
    n_errors = sum(s.n_errors for s in sentences)
    tag_counts: dict[str, int] = {}
    for s in sentences:
        if s.tags is None:
            continue
        for tag in s.tags:
            if tag:
                tag_counts[tag] = tag_counts.get(tag, 0) + 1
    return CorpusStats(
        n_sentences=len(sentences),
        n_chars=n_chars,
        n_errors=n_errors,
        error_rate=n_errors / n_chars if n_chars else 0.0,
        max_len=max((len(s) for s in sentences), default=0),
        tag_counts=tag_counts,
    )
