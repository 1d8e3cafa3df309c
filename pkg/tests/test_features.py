import numpy as np
import pytest

from jointparse.errors import JointParseError
from jointparse.features import (
    LABEL_SLOTS,
    PARSE_SLOTS,
    TAG_SLOTS,
    AblationConfig,
    Pads,
    TagChain,
    TagEncoder,
    WordEncoder,
    extract_label_features,
    extract_parse_features,
    extract_tag_features,
    input_dim,
    slot_names,
)
from jointparse.neural import Tape
from jointparse.synthetic import example_sentence
from jointparse.transition import (
    LEFT,
    RIGHT,
    SHIFT,
    ClassifierKind,
    Configuration,
    Label,
    Tag,
    apply_action,
)
from jointparse.vocab import PretrainedEmbeddings, build_vocab

FULL = AblationConfig()
NONE = AblationConfig(tag_to_parse=False, parse_to_tag=False)


def config_after(actions, n=4):
    c = Configuration.initial(n)
    for a in actions:
        c = apply_action(c, a)
    return c


class Setup:
    """Distinct constant vectors per word and tag, so slots can be identified."""

    def __init__(self, n=4, word_dim=3, tag_dim=2):
        self.tape = Tape(record=False)
        self.words = [self.tape.constant(np.full(word_dim, 10.0 + i)) for i in range(1, n + 1)]
        self.pads = Pads(word_dim, tag_dim)
        self.pads.word.value[...] = -1.0
        self.pads.tag.value[...] = -2.0
        self.encoder = TagEncoder(5, tag_dim, tag_dim, np.random.default_rng(0))
        self.chain = TagChain(self.tape, self.encoder, n)

    def tag(self, *tag_ids):
        for t in tag_ids:
            self.chain.advance(self.tape, t)

    def ident(self, var):
        v = var.value
        if np.all(v == -1.0):
            return "pad"
        if np.all(v == -2.0):
            return "tpad"
        for i, w in enumerate(self.words, start=1):
            if np.array_equal(v, w.value):
                return f"w{i}"
        for i, t in enumerate(self.chain.vectors, start=1):
            if np.array_equal(v, t.value):
                return f"t{i}"
        return "?"


def test_slot_names_per_ablation():
    assert slot_names(ClassifierKind.TAGGING, FULL) == TAG_SLOTS
    assert slot_names(ClassifierKind.TAGGING, NONE) == ("x_B-2", "t_B-2", "x_S0", "x_B0")
    assert slot_names(ClassifierKind.STRUCTURAL, FULL) == PARSE_SLOTS
    assert slot_names(ClassifierKind.STRUCTURAL, NONE) == ("x_S2", "x_S1", "x_S0", "x_B0")
    assert slot_names(ClassifierKind.LABELING, FULL) == LABEL_SLOTS
    assert slot_names(ClassifierKind.LABELING, NONE) == ("x_S1", "x_S0")
    # the two switches are independent
    only_tag = AblationConfig(tag_to_parse=True, parse_to_tag=False)
    assert slot_names(ClassifierKind.STRUCTURAL, only_tag) == PARSE_SLOTS
    assert len(slot_names(ClassifierKind.TAGGING, only_tag)) == 4


def test_input_dims():
    x, t = 400, 100
    assert input_dim(ClassifierKind.TAGGING, FULL, x, t) == 4 * x + 2 * t
    assert input_dim(ClassifierKind.STRUCTURAL, FULL, x, t) == 4 * x + 3 * t
    assert input_dim(ClassifierKind.LABELING, FULL, x, t) == 2 * x + 2 * t
    assert input_dim(ClassifierKind.TAGGING, NONE, x, t) == 3 * x + t
    assert input_dim(ClassifierKind.STRUCTURAL, NONE, x, t) == 4 * x
    assert input_dim(ClassifierKind.LABELING, NONE, x, t) == 2 * x


def test_tag_features_before_tagging_won():
    s = Setup()
    s.tag(0)
    c = config_after([SHIFT, Tag(0), SHIFT])
    slots = extract_tag_features(s.tape, c, s.words, s.chain, s.pads, FULL)
    assert [n for n, _ in slots] == list(TAG_SLOTS)
    assert [s.ident(v) for _, v in slots] == ["w1", "t1", "w1", "t1", "w2", "w3"]


def test_tag_features_first_word():
    s = Setup()
    c = config_after([SHIFT])
    slots = extract_tag_features(s.tape, c, s.words, s.chain, s.pads, FULL)
    assert [s.ident(v) for _, v in slots] == ["pad", "tpad", "pad", "tpad", "w1", "w2"]
    ablated = extract_tag_features(s.tape, c, s.words, s.chain, s.pads, NONE)
    assert [n for n, _ in ablated] == ["x_B-2", "t_B-2", "x_S0", "x_B0"]


def test_tag_features_s1_differs_from_b2():
    # S1 and B-2 coincide while nothing below S0 has been reduced away
    s = Setup()
    s.tag(0, 1, 2)
    c = config_after([SHIFT, Tag(0), SHIFT, Tag(1), LEFT, Label(0), SHIFT, Tag(2), SHIFT])
    slots = dict(extract_tag_features(s.tape, c, s.words, s.chain, s.pads, FULL))
    assert s.ident(slots["x_S1"]) == "w3" and s.ident(slots["x_B-2"]) == "w3"
    # after word 3 is reduced into word 2, S1 is word 2 but B-2 is still word 3
    c2 = config_after([SHIFT, Tag(0), SHIFT, Tag(1), SHIFT, Tag(2), RIGHT, Label(0), SHIFT])
    slots = dict(extract_tag_features(s.tape, c2, s.words, s.chain, s.pads, FULL))
    assert s.ident(slots["x_S1"]) == "w2" and s.ident(slots["x_B-2"]) == "w3"
    assert s.ident(slots["x_B0"]) == "pad"


def test_parse_features_reference_states():
    s = Setup()
    s.tag(0, 1)
    c = config_after([SHIFT, Tag(0), SHIFT, Tag(1)])
    slots = extract_parse_features(s.tape, c, s.words, s.chain, s.pads, FULL)
    assert [n for n, _ in slots] == list(PARSE_SLOTS)
    assert [s.ident(v) for _, v in slots] == ["pad", "tpad", "w1", "t1", "w2", "t2", "w3"]
    blank = Setup()
    slots = extract_parse_features(blank.tape, Configuration.initial(4), blank.words,
                                   blank.chain, blank.pads, NONE)
    assert [blank.ident(v) for _, v in slots] == ["pad", "pad", "pad", "w1"]


def test_label_features_read_after_reduce():
    s = Setup()
    s.tag(0, 1)
    c = config_after([SHIFT, Tag(0), SHIFT, Tag(1), LEFT])
    slots = extract_label_features(s.tape, c, s.words, s.chain, s.pads, FULL)
    assert [s.ident(v) for _, v in slots] == ["pad", "tpad", "w2", "t2"]
    s.tag(2, 3)
    c = config_after([SHIFT, Tag(0), SHIFT, Tag(1), LEFT, Label(0), SHIFT, Tag(2), SHIFT, Tag(3),
                      LEFT])
    slots = extract_label_features(s.tape, c, s.words, s.chain, s.pads, FULL)
    assert [s.ident(v) for _, v in slots] == ["w2", "t2", "w4", "t4"]
    assert len(extract_label_features(s.tape, c, s.words, s.chain, s.pads, NONE)) == 2


def test_wrong_kind_is_rejected():
    s = Setup()
    c = Configuration.initial(4)
    with pytest.raises(JointParseError):
        extract_tag_features(s.tape, c, s.words, s.chain, s.pads, FULL)
    with pytest.raises(JointParseError):
        extract_label_features(s.tape, c, s.words, s.chain, s.pads, FULL)
    with pytest.raises(JointParseError):
        extract_parse_features(s.tape, config_after([SHIFT]), s.words, s.chain, s.pads, FULL)


def test_tag_chain():
    tape = Tape(record=False)
    zero = TagEncoder(3, 2, 4)
    chain = TagChain(tape, zero, 2)
    assert np.array_equal(chain.advance(tape, 1).value, np.zeros(4))
    chain.advance(tape, 0)
    with pytest.raises(JointParseError):
        chain.advance(tape, 0)

    enc = TagEncoder(3, 2, 4, np.random.default_rng(1))

    def final(history):
        ch = TagChain(tape, enc, len(history))
        for t in history:
            ch.advance(tape, t)
        return ch.vectors

    a, b = final([0, 2]), final([1, 2])
    assert not np.allclose(a[-1].value, b[-1].value)
    # earlier vectors never change when more tags arrive
    assert np.array_equal(final([0])[0].value, final([0, 1, 2])[0].value)


def test_word_encoder_shapes_and_unknowns():
    v = build_vocab([example_sentence()])
    pre = PretrainedEmbeddings(["he", "game"], np.ones((2, 5)))
    enc = WordEncoder(v, 6, 3, 4, 7, pre, rng=np.random.default_rng(0))
    assert enc.input_dim == 6 + 5 + 8 and enc.output_dim == 14
    tape = Tape(record=False)
    outs = enc.encode_sentence(tape, ["He", "won", "zzz", ""])
    assert [o.value.shape for o in outs] == [(14,)] * 4
    won = enc.embed_word(tape, "won").value
    assert np.array_equal(won[6:11], np.zeros(5))
    he = enc.embed_word(tape, "HE").value
    assert np.array_equal(he[6:11], np.ones(5))
    assert np.array_equal(enc.char_encode(tape, "").value, enc.char_pad.value)
    assert not enc.pretrained.trainable
    with pytest.raises(JointParseError):
        enc.encode_sentence(tape, [])


def test_word_encoder_context_matters():
    v = build_vocab([example_sentence()])
    enc = WordEncoder(v, 4, 3, 3, 5, rng=np.random.default_rng(0))
    tape = Tape(record=False)
    a = enc.encode_sentence(tape, ["He", "won"])[0].value
    b = enc.encode_sentence(tape, ["He", "game"])[0].value
    assert not np.allclose(a, b)


def test_singleton_unk_replacement():
    v = build_vocab([example_sentence()])
    enc = WordEncoder(v, 4, 3, 3, 5, rng=np.random.default_rng(0))
    tape = Tape(record=False)
    plain = enc.embed_word(tape, "won").value
    forced = enc.embed_word(tape, "won", np.random.default_rng(0), unk_rate=0.999999).value
    assert np.array_equal(forced[:4], enc.word_table.value[1])
    assert not np.array_equal(plain[:4], forced[:4])


def test_pads_receive_gradient():
    s = Setup()
    tape = Tape()
    c = Configuration.initial(4)
    slots = extract_parse_features(tape, c, s.words, s.chain, s.pads, FULL)
    total = tape.sum([tape.softmax_xent(v, 0)[1] for _, v in slots])
    tape.backward(total)
    assert np.any(s.pads.word.grad != 0) and np.any(s.pads.tag.grad != 0)
