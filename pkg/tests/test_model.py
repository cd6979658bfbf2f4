"""Whole-model wiring: building, decoding, persistence, variant collapse."""

import numpy as np
import pytest

from latspell.errors import ConfigError
from latspell.lexicon import PinyinTable, build_lexicon, empty_lexicon
from latspell.model import ModelConfig, Tagger, _param_shapes

CHARS = list("晚上交洁的月光叫")
TABLE = PinyinTable(
    {
        "晚": "wan3", "上": "shang4", "交": "jiao1", "洁": "jie2",
        "的": "de5", "月": "yue4", "光": "guang1", "叫": "jiao4",
    }
)
LEXICON = build_lexicon(["晚上", "月光", "晚", "上交"])


def small_cfg(**kw):
    kw.setdefault("char_emb", 8)
    kw.setdefault("pinyin_emb", 8)
    kw.setdefault("word_emb", 8)
    kw.setdefault("hidden", 8)
    return ModelConfig(**kw)


def build(variant="fl-lstm-crf", **kw):
    cfg = small_cfg(variant=variant, **kw)
    return Tagger.build(cfg, CHARS, TABLE, LEXICON, seed=7)


def test_variant_switch_defaults():
    assert ModelConfig(variant="lstm-crf").use_pinyin is False
    assert ModelConfig(variant="lstm-crf").use_lattice is False
    assert ModelConfig(variant="l-lstm-crf").use_pinyin is False
    assert ModelConfig(variant="l-lstm-crf").use_lattice is True
    assert ModelConfig(variant="fl-lstm-crf").use_pinyin is True
    assert ModelConfig(variant="fl-lstm-crf").use_lattice is True
    with pytest.raises(ConfigError):
        ModelConfig(variant="gru-crf")


def test_param_sets_grow_with_variant():
    base = set(_param_shapes(small_cfg(variant="lstm-crf"), 10, 5, 6))
    lat = set(_param_shapes(small_cfg(variant="l-lstm-crf"), 10, 5, 6))
    full = set(_param_shapes(small_cfg(variant="fl-lstm-crf"), 10, 5, 6))
    assert base < lat < full
    assert "embed.word" in lat - base
    assert "fusion.char.W" in full - lat
    # no pinyin machinery without the fusion switch
    assert not any(n.startswith(("embed.pinyin", "fusion.")) for n in lat)


def test_fused_input_width():
    cfg = small_cfg(variant="fl-lstm-crf")
    shapes = _param_shapes(cfg, 10, 5, 6)
    assert cfg.x_dim == 16
    assert shapes["lstm.fwd.W"] == (24, 16 + 8)
    assert shapes["gate.fwd.W"] == (8, 16 + 8)


def test_build_aligns_syllables_with_vocab():
    m = build()
    assert m.syllable_of_char[m.char_vocab.id("交")] == "jiao"
    assert m.syllable_of_char[0] == "<unk>"  # PAD row carries no syllable
    assert m.syllable_of_char[1] == "<unk>"
    assert "jiao" in m.pinyin_vocab
    # 交 and 叫 share one toneless syllable row
    assert m.pinyin_vocab.id("jiao") == m.pinyin_vocab.id(
        m.syllable_of_char[m.char_vocab.id("叫")]
    )


def test_decode_basic():
    m = build()
    labels = m.decode(list("晚上交洁"))
    assert len(labels) == 4
    assert set(labels) <= {"T", "F"}
    assert m.decode([]) == []
    assert m.decode(list("晚上交洁")) == labels  # eval path is deterministic


def test_decode_handles_unknown_chars():
    m = build()
    labels = m.decode(list("晚上X"))
    assert len(labels) == 3


def test_nll_positive_and_repeatable():
    m = build()
    chars = list("晚上交")
    a = m.sentence_nll(chars, ["T", "T", "F"]).data[0]
    b = m.sentence_nll(chars, ["T", "T", "F"]).data[0]
    assert a == b
    assert a > 0


def test_save_load_round_trip(tmp_path):
    m = build()
    path = tmp_path / "model.fllc"
    m.save(path)
    m2 = Tagger.load(path)
    assert m2.cfg == m.cfg
    assert set(m2.params) == set(m.params)
    for name, v in m.params.items():
        # f32 storage: round-trip through storage precision, then exact
        assert np.array_equal(m2.params[name].data, v.data.astype(np.float32).astype(np.float64))
    assert m2.char_vocab.symbols == m.char_vocab.symbols
    assert m2.pinyin_vocab.symbols == m.pinyin_vocab.symbols
    assert m2.syllable_of_char == m.syllable_of_char
    # single-char words carry no lattice row, so only multi-char words persist
    assert sorted(m2.lexicon.multi_words) == sorted(m.lexicon.multi_words)
    chars = list("晚上交洁的月光")
    assert m2.spans_for(chars) == m.spans_for(chars)
    assert m2.decode(chars) == m.decode(chars)


def test_save_load_baseline_variant(tmp_path):
    m = build(variant="lstm-crf")
    path = tmp_path / "base.fllc"
    m.save(path)
    m2 = Tagger.load(path)
    assert m2.cfg.use_pinyin is False and m2.cfg.use_lattice is False
    assert "embed.pinyin" not in m2.params
    assert m2.decode(list("晚上")) == m.decode(list("晚上"))


def test_switched_off_fl_collapses_to_baseline_bitwise():
    cfg_fl = small_cfg(variant="fl-lstm-crf", use_pinyin=False, use_lattice=False)
    cfg_base = small_cfg(variant="lstm-crf")
    m_fl = Tagger.build(cfg_fl, CHARS, TABLE, empty_lexicon(), seed=11)
    m_base = Tagger.build(cfg_base, CHARS, TABLE, empty_lexicon(), seed=11)
    assert set(m_fl.params) == set(m_base.params)
    for name in m_fl.params:
        assert np.array_equal(m_fl.params[name].data, m_base.params[name].data), name
    chars = list("晚上交洁的月光")
    labels = ["T", "T", "F", "T", "T", "T", "T"]
    nll_fl = m_fl.sentence_nll(chars, labels).data[0]
    nll_base = m_base.sentence_nll(chars, labels).data[0]
    assert nll_fl == nll_base
    assert m_fl.decode(chars) == m_base.decode(chars)


def test_empty_lexicon_disables_spans():
    cfg = small_cfg(variant="fl-lstm-crf")
    m = Tagger.build(cfg, CHARS, TABLE, empty_lexicon(), seed=3)
    assert m.spans_for(list("晚上交")) == []
    assert len(m.decode(list("晚上交"))) == 3


def test_clone_restore_params():
    m = build()
    snap = m.clone_params()
    name = "crf.trans"
    m.params[name].data[0, 0] += 1.0
    assert not np.array_equal(m.params[name].data, snap[name])
    m.restore_params(snap)
    assert np.array_equal(m.params[name].data, snap[name])
    snap["bogus"] = np.zeros(1)
    with pytest.raises(KeyError):
        m.restore_params({"missing": np.zeros(1)})
