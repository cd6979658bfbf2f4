"""Command-line front end: train, eval, tag, grad-check, synth, stats.

Settings come from an optional flat key=value config file plus flags; flags
win. Every command is deterministic given its settings and --seed. Reports
are line-oriented key=value text so scripts can grep them. Exit codes:
0 success, 2 config or I/O problem, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

from .corpus import (
    DEFAULT_TERMINATORS,
    LABEL_ERROR,
    corpus_stats,
    load_corpus,
    save_corpus,
    split_sentences,
)
from .errors import ConfigError, NumericError
from .gradcheck import check_model_gradients
from .lexicon import (
    builtin_pinyin_path,
    empty_lexicon,
    load_pinyin_table,
    load_word_list,
)
from .model import Tagger
from .synth import make_synthetic
from .training import TrainConfig, evaluate, train


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


# key -> (converter, help); keys double as config-file keys and --flag names
_SCHEMA: dict = {
    "seed": (int, "random seed controlling all randomness (default 0)"),
    "corpus": (str, "labeled corpus file (char label [tag] lines)"),
    "words": (str, "word list, one word per line (default: no lexicon)"),
    "pinyin": (str, "char<TAB>syllable table (default: built-in table)"),
    "model": (str, "model file to write (train) or read (eval, tag)"),
    "variant": (str, "lstm-crf | l-lstm-crf | fl-lstm-crf"),
    "text": (str, "raw UTF-8 text file to tag"),
    "out": (str, "output corpus file for synth"),
    "terminators": (str, "sentence-ending characters for tag (default 。！？)"),
    "lr0": (float, "initial learning rate"),
    "decay": (float, "learning-rate decay per epoch"),
    "epochs": (int, "number of training epochs"),
    "dropout": (float, "dropout rate on embeddings"),
    "clip_norm": (float, "global gradient-norm clip"),
    "hidden": (int, "LSTM hidden size per direction"),
    "char_emb": (int, "character embedding size"),
    "pinyin_emb": (int, "pinyin embedding size"),
    "word_emb": (int, "lattice word embedding size"),
    "tone_mode": (_parse_bool, "keep tone digits when mapping pinyin"),
    "dev_fraction": (float, "fraction of training data held out as dev"),
    "use_pinyin": (_parse_bool, "override the variant's pinyin switch"),
    "use_lattice": (_parse_bool, "override the variant's lattice switch"),
    "char_inventory": (str, "embed chars from the 'corpus' or the whole pinyin 'table'"),
    "target_train_f1": (float, "stop once train F1 reaches this value"),
    "n_sentences": (int, "number of sentences to synthesize"),
    "error_rate": (float, "per-character corruption rate for synth"),
}

_TRAIN_KEYS = (
    "lr0", "decay", "epochs", "seed", "dropout", "variant", "clip_norm",
    "hidden", "char_emb", "pinyin_emb", "word_emb", "tone_mode",
    "dev_fraction", "use_pinyin", "use_lattice", "char_inventory",
    "target_train_f1",
)

_COMMON = ("seed", "corpus", "words", "pinyin", "model", "variant")

_EXTRA = {
    "train": (
        "lr0", "decay", "epochs", "dropout", "clip_norm", "hidden",
        "char_emb", "pinyin_emb", "word_emb", "tone_mode", "dev_fraction",
        "use_pinyin", "use_lattice", "char_inventory", "target_train_f1",
    ),
    "eval": (),
    "tag": ("text", "terminators"),
    "grad-check": (),
    "synth": ("n_sentences", "error_rate", "out", "tone_mode"),
    "stats": (),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latspell",
        description="Train, evaluate, and run a lattice LSTM-CRF spelling-error tagger.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    briefs = {
        "train": "train a tagger and write the best-dev model file",
        "eval": "score a model against a labeled corpus",
        "tag": "label raw text, one char<TAB>label line per character",
        "grad-check": "verify analytic gradients against finite differences",
        "synth": "generate a synthetic labeled corpus",
        "stats": "report corpus size and error counts",
    }
    for command, extra in _EXTRA.items():
        p = sub.add_parser(command, help=briefs[command])
        p.add_argument("--config", help="flat key=value settings file; flags override it")
        for key in _COMMON + extra:
            conv, text = _SCHEMA[key]
            p.add_argument("--" + key.replace("_", "-"), type=conv, help=text)
    return parser


def _load_config_file(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    values: dict = {}
    for ln, line in enumerate(lines, start=1):
        body = line.strip()
        if not body or body.startswith("#"):
            continue
        key, sep, raw = body.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{path}:{ln}: expected key=value, got {line!r}")
        if key not in _SCHEMA:
            raise ConfigError(f"{path}:{ln}: unknown config key {key!r}")
        conv = _SCHEMA[key][0]
        try:
            values[key] = conv(raw.strip())
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"{path}:{ln}: bad value for {key}: {e}") from e
    return values


def _merge(args: argparse.Namespace) -> dict:
    """Config-file values with any explicitly passed flags layered on top."""
    values = _load_config_file(args.config) if args.config else {}
    for key in _SCHEMA:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return values


def _require(values: dict, command: str, *keys: str) -> None:
    for key in keys:
        if key not in values:
            flag = "--" + key.replace("_", "-")
            raise ConfigError(f"the {command} command requires {flag}")


def _fmt(x: float) -> str:
    return f"{float(x):.6f}"


def _load_table(values: dict):
    path = values.get("pinyin", builtin_pinyin_path())
    return load_pinyin_table(path, tone_mode=values.get("tone_mode", False))


def _load_lexicon(values: dict):
    if "words" in values:
        return load_word_list(values["words"])
    return empty_lexicon()


def _train_config(values: dict) -> TrainConfig:
    return TrainConfig(**{k: values[k] for k in _TRAIN_KEYS if k in values})


# ------------------------------------------------------------- commands

def cmd_train(values: dict) -> int:
    _require(values, "train", "corpus", "model")
    sentences = load_corpus(values["corpus"])
    cfg = _train_config(values)
    result = train(sentences, _load_table(values), _load_lexicon(values), cfg, log_fn=print)
    result.model.save(values["model"])
    print(f"best_epoch={result.best_epoch}")
    print(f"best_dev_f1={_fmt(result.best_dev_f1)}")
    print(f"model={values['model']}")
    return 0


def cmd_eval(values: dict) -> int:
    _require(values, "eval", "model", "corpus")
    model = Tagger.load(values["model"])
    report = evaluate(model, load_corpus(values["corpus"]))
    print(f"tp={report.tp}")
    print(f"fp={report.fp}")
    print(f"fn={report.fn}")
    print(f"precision={_fmt(report.precision)}")
    print(f"recall={_fmt(report.recall)}")
    print(f"f1={_fmt(report.f1)}")
    print(f"degenerate={'true' if report.degenerate else 'false'}")
    return 0


def cmd_tag(values: dict) -> int:
    _require(values, "tag", "model", "text")
    model = Tagger.load(values["model"])
    try:
        with open(values["text"], encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read text file {values['text']}: {e}") from e
    pieces = split_sentences(raw, values.get("terminators", DEFAULT_TERMINATORS))
    blocks = []
    flagged = []
    for si, piece in enumerate(pieces):
        chars = list(piece)
        labels = model.decode(chars)
        blocks.append("\n".join(f"{c}\t{l}" for c, l in zip(chars, labels)))
        flagged += [
            f"error sentence={si} index={i} char={c}"
            for i, (c, l) in enumerate(zip(chars, labels))
            if l == LABEL_ERROR
        ]
    if blocks:
        sys.stdout.write("\n\n".join(blocks) + "\n")
    for line in flagged:
        print(line, file=sys.stderr)
    return 0


def cmd_gradcheck(values: dict) -> int:
    report = check_model_gradients(
        variant=values.get("variant", "fl-lstm-crf"),
        seed=values.get("seed", 0),
    )
    print(report.format())
    return 0 if report.ok else 3


def cmd_synth(values: dict) -> int:
    _require(values, "synth", "words", "out")
    sentences = make_synthetic(
        _load_table(values),
        _load_lexicon(values),
        n_sentences=values.get("n_sentences", 100),
        seed=values.get("seed", 0),
        error_rate=values.get("error_rate", 0.3),
    )
    save_corpus(values["out"], sentences)
    print(f"n_sentences={len(sentences)}")
    print(f"n_errors={sum(s.n_errors for s in sentences)}")
    print(f"out={values['out']}")
    return 0


def cmd_stats(values: dict) -> int:
    _require(values, "stats", "corpus")
    st = corpus_stats(load_corpus(values["corpus"]))
    print(f"n_sentences={st.n_sentences}")
    print(f"n_chars={st.n_chars}")
    print(f"n_errors={st.n_errors}")
    print(f"error_rate={_fmt(st.error_rate)}")
    print(f"max_len={st.max_len}")
    for tag in sorted(st.tag_counts):
        print(f"tag.{tag}={st.tag_counts[tag]}")
    return 0


_DISPATCH = {
    "train": cmd_train,
    "eval": cmd_eval,
    "tag": cmd_tag,
    "grad-check": cmd_gradcheck,
    "synth": cmd_synth,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _DISPATCH[args.command](_merge(args))
    except NumericError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
