"""Metrics, dev splitting, and the training loop itself."""

import numpy as np
import pytest

from latspell.core.value import Value
from latspell.corpus import Sentence, parse_corpus
from latspell.errors import ConfigError, NumericError
from latspell.lexicon import PinyinTable, build_lexicon, build_vocabs, empty_lexicon
from latspell.model import Tagger
from latspell.training import (
    EpochRecord,
    MetricsReport,
    TrainConfig,
    evaluate,
    evaluate_by_tag,
    split_dev,
    train,
)

TABLE = PinyinTable(
    {
        "那": "na4", "哪": "na3", "里": "li3", "鲤": "li3",
        "大": "da4", "头": "tou2", "问": "wen4", "好": "hao3",
    }
)
LEX = build_lexicon(["那里", "哪里", "大头", "问好"])


class FixedDecoder:
    """Stands in for a model: returns canned label sequences in call order."""

    def __init__(self, outputs):
        self.outputs = list(outputs)
        self.i = 0

    def decode(self, chars):
        out = self.outputs[self.i]
        self.i += 1
        assert len(out) == len(chars)
        return list(out)


def sent(chars, labels, tags=None):
    return Sentence(tuple(chars), tuple(labels), tags)


def test_metrics_worked_example():
    r = MetricsReport.from_counts(tp=2, fp=1, fn=2)
    assert r.precision == pytest.approx(2 / 3)
    assert r.recall == pytest.approx(1 / 2)
    assert r.f1 == pytest.approx(4 / 7)
    assert not r.degenerate


def test_metrics_perfect_and_degenerate():
    perfect = MetricsReport.from_counts(tp=5, fp=0, fn=0)
    assert (perfect.precision, perfect.recall, perfect.f1) == (1.0, 1.0, 1.0)
    nothing = MetricsReport.from_counts(tp=0, fp=0, fn=0)
    assert (nothing.precision, nothing.recall, nothing.f1) == (0.0, 0.0, 0.0)
    assert nothing.degenerate
    no_hits = MetricsReport.from_counts(tp=0, fp=3, fn=2)
    assert no_hits.f1 == 0.0 and no_hits.degenerate


def test_metrics_bounds_property():
    rng = np.random.default_rng(0)
    for _ in range(200):
        tp, fp, fn = (int(x) for x in rng.integers(0, 6, size=3))
        r = MetricsReport.from_counts(tp, fp, fn)
        assert 0.0 <= r.precision <= 1.0
        assert 0.0 <= r.recall <= 1.0
        assert 0.0 <= r.f1 <= max(r.precision, r.recall) + 1e-15
        assert (r.f1 == 0.0) == (tp == 0)


def test_evaluate_counts_error_label_chars():
    gold = [
        sent("那里大", "TFF"),
        sent("问好", "TT"),
    ]
    model = FixedDecoder(["TFT", "FT"])  # tp=1 (pos 1), fn=1 (pos 2), fp=1 (问)
    r = evaluate(model, gold)
    assert (r.tp, r.fp, r.fn) == (1, 1, 1)


def test_evaluate_by_tag_uses_global_precision():
    gold = [
        sent("那里大头", "FFFT", ("homophone", "near", "other", "")),
    ]
    # hits the homophone and misses the other two, one false positive at the end
    model_outputs = ["FTTF"]
    overall = evaluate(FixedDecoder(model_outputs), gold)
    # the by-tag pass decodes once for overall counts and once per tagged sentence
    per_tag = evaluate_by_tag(FixedDecoder(model_outputs * 2), gold)
    assert set(per_tag) == {"homophone", "near", "other"}
    homo = per_tag["homophone"]
    assert (homo.tp, homo.fn) == (1, 0)
    assert homo.recall == 1.0
    assert homo.precision == overall.precision == 0.5
    assert homo.f1 == pytest.approx(2 * 0.5 * 1.0 / 1.5)
    assert per_tag["near"].recall == 0.0
    assert per_tag["near"].f1 == 0.0


def test_split_dev_deterministic_and_sized():
    sents = [sent("那", "T") for _ in range(20)]
    tr1, dev1 = split_dev(sents, seed=4, dev_fraction=0.1)
    tr2, dev2 = split_dev(sents, seed=4, dev_fraction=0.1)
    assert len(dev1) == 2 and len(tr1) == 18
    assert [id(s) for s in tr1] == [id(s) for s in tr2]
    none_tr, none_dev = split_dev(sents, seed=4, dev_fraction=0.0)
    assert none_dev == [] and len(none_tr) == 20
    # at least one sentence always stays in train
    tiny_tr, tiny_dev = split_dev(sents[:2], seed=0, dev_fraction=0.9)
    assert len(tiny_tr) >= 1


def test_train_config_validation():
    with pytest.raises(ConfigError):
        TrainConfig(lr0=0.0)
    with pytest.raises(ConfigError):
        TrainConfig(epochs=0)
    with pytest.raises(ConfigError):
        TrainConfig(dropout=1.0)
    with pytest.raises(ConfigError):
        TrainConfig(clip_norm=0.0)
    with pytest.raises(ConfigError):
        TrainConfig(dev_fraction=1.0)
    with pytest.raises(ConfigError):
        TrainConfig(char_inventory="lexicon")


def test_train_rejects_empty_corpus():
    with pytest.raises(ConfigError):
        train([], TABLE, LEX, TrainConfig())


SMALL = dict(hidden=12, char_emb=8, pinyin_emb=8, word_emb=8)


def overfit_corpus():
    text = "那 T\n里 T\n大 F\n\n问 T\n好 T\n\n哪 F\n里 T\n头 T\n"
    return parse_corpus(text)


def test_single_sentence_loss_decreases():
    corpus = [sent("那里大头", "TTFT")]
    cfg = TrainConfig(seed=5, epochs=5, dropout=0.0, dev_fraction=0.0, **SMALL)
    res = train(corpus, TABLE, LEX, cfg)
    losses = [r.train_loss for r in res.log]
    assert len(losses) == 5
    assert all(b < a for a, b in zip(losses, losses[1:]))


def test_train_deterministic_bit_for_bit():
    corpus = overfit_corpus()
    cfg = TrainConfig(seed=6, epochs=3, **SMALL)
    r1 = train(corpus, TABLE, LEX, cfg)
    r2 = train(corpus, TABLE, LEX, cfg)
    assert [e.train_loss for e in r1.log] == [e.train_loss for e in r2.log]
    for name in r1.model.params:
        assert np.array_equal(r1.model.params[name].data, r2.model.params[name].data)


def test_train_epoch_log_shape():
    corpus = overfit_corpus()
    cfg = TrainConfig(seed=6, epochs=2, **SMALL)
    res = train(corpus, TABLE, LEX, cfg)
    assert [r.epoch for r in res.log] == [0, 1]
    assert res.log[0].lr == pytest.approx(0.015)
    assert res.log[1].lr == pytest.approx(0.015 / 1.05)
    line = res.log[0].format()
    assert line.startswith("epoch=0 ")
    for key in ("lr=", "train_loss=", "dev_precision=", "dev_recall=", "dev_f1="):
        assert key in line


def test_best_dev_checkpoint_restored():
    corpus = overfit_corpus() * 4  # 12 sentences so the dev split holds one
    cfg = TrainConfig(seed=8, epochs=4, **SMALL)
    res = train(corpus, TABLE, LEX, cfg)
    assert res.best_dev_f1 == max(r.dev.f1 for r in res.log)
    first_best = next(i for i, r in enumerate(res.log) if r.dev.f1 == res.best_dev_f1)
    assert res.best_epoch == first_best
    _, dev_sents = split_dev(corpus, cfg.seed, cfg.dev_fraction)
    assert evaluate(res.model, dev_sents).f1 == res.best_dev_f1


def test_target_train_f1_stops_early():
    corpus = overfit_corpus()
    cfg = TrainConfig(
        seed=9, epochs=60, dropout=0.0, dev_fraction=0.0,
        target_train_f1=1.0, **SMALL,
    )
    res = train(corpus, TABLE, LEX, cfg)
    assert res.log[-1].train_f1 == 1.0
    assert len(res.log) < 60
    assert evaluate(res.model, corpus).f1 == 1.0


def test_nan_loss_aborts_with_sentence_index(monkeypatch):
    corpus = overfit_corpus()

    def bad_nll(self, chars, labels, spans=None, rng=None):
        return Value(np.array([np.nan]))

    monkeypatch.setattr(Tagger, "sentence_nll", bad_nll)
    cfg = TrainConfig(seed=10, epochs=1, **SMALL)
    with pytest.raises(NumericError, match="sentence index"):
        train(corpus, TABLE, LEX, cfg)


def test_lattice_free_variant_trains():
    corpus = overfit_corpus()
    cfg = TrainConfig(seed=11, epochs=2, variant="lstm-crf", **SMALL)
    res = train(corpus, None, empty_lexicon(), cfg)
    assert res.model.cfg.use_lattice is False
    assert len(res.log) == 2


def test_char_inventory_table_covers_unseen_chars():
    corpus = overfit_corpus()  # uses 7 of TABLE's 8 chars; 鲤 never appears
    small = dict(SMALL, epochs=1, seed=3, dropout=0.0, dev_fraction=0.0)
    res = train(corpus, TABLE, LEX, TrainConfig(char_inventory="table", **small))
    assert "鲤" in res.model.char_vocab
    # and its pinyin row is the trained li3 family row, not UNK
    cid = res.model.char_vocab.id("鲤")
    assert res.model.syllable_of_char[cid] == "li"

    default = train(corpus, TABLE, LEX, TrainConfig(**small))
    assert "鲤" not in default.model.char_vocab


def test_char_inventory_table_requires_table():
    cfg = TrainConfig(char_inventory="table", variant="lstm-crf", **SMALL)
    with pytest.raises(ConfigError, match="pinyin table"):
        train(overfit_corpus(), None, empty_lexicon(), cfg)


def test_train_vocabs_match_build_vocabs():
    corpus = overfit_corpus()
    small = dict(SMALL, epochs=1, seed=3, dropout=0.0, dev_fraction=0.0)
    res = train(corpus, TABLE, LEX, TrainConfig(**small))
    chars, pinyins = build_vocabs([s.chars for s in corpus], TABLE)
    assert res.model.char_vocab.symbols == chars.symbols
    assert res.model.pinyin_vocab.symbols == pinyins.symbols
