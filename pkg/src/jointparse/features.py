"""Word and tag representations and the classifier input layouts.

Word vectors come from a BiLSTM run once per sentence over
``[word embedding; pretrained embedding; char BiLSTM]``.  Tag vectors come
from a unidirectional LSTM that is advanced each time a ``Tag`` action fires,
so ``tag_vectors[n]`` summarises the tags of words ``1..n+1`` in shift order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import JointParseError
from .neural import LSTMCell, Parameter, Tape, Var, glorot
from .transition import ClassifierKind, Configuration, classifier_kind
from .vocab import UNK_ID, PretrainedEmbeddings, Vocab


@dataclass(frozen=True)
class AblationConfig:
    """Switches for the two directions of tagger/parser interaction.

    ``tag_to_parse`` feeds tag vectors to the structural and label classifiers;
    ``parse_to_tag`` feeds the second stack item to the tag classifier.
    """

    tag_to_parse: bool = True
    parse_to_tag: bool = True


TAG_SLOTS = ("x_S1", "t_S1", "x_B-2", "t_B-2", "x_S0", "x_B0")
PARSE_SLOTS = ("x_S2", "t_S2", "x_S1", "t_S1", "x_S0", "t_S0", "x_B0")
LABEL_SLOTS = ("x_S1", "t_S1", "x_S0", "t_S0")


def slot_names(kind: ClassifierKind, ablation: AblationConfig) -> tuple[str, ...]:
    if kind is ClassifierKind.TAGGING:
        if ablation.parse_to_tag:
            return TAG_SLOTS
        return tuple(s for s in TAG_SLOTS if not s.endswith("S1"))
    names = PARSE_SLOTS if kind is ClassifierKind.STRUCTURAL else LABEL_SLOTS
    if ablation.tag_to_parse:
        return names
    return tuple(s for s in names if s.startswith("x_"))


def input_dim(kind: ClassifierKind, ablation: AblationConfig, word_dim: int, tag_dim: int) -> int:
    return sum(word_dim if s.startswith("x_") else tag_dim for s in slot_names(kind, ablation))


def uniform_init(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    fan_in, fan_out = (shape[0], 1) if len(shape) == 1 else shape
    return glorot(rng, shape, fan_in, fan_out)


class WordEncoder:
    """Embedding tables, the character BiLSTM and the sentence BiLSTM."""

    def __init__(self, vocab: Vocab, word_dim: int, char_dim: int, char_hidden: int,
                 encoder_hidden: int, pretrained: Optional[PretrainedEmbeddings] = None,
                 tune_pretrained: bool = False, rng: Optional[np.random.Generator] = None):
        self.vocab = vocab
        V, C = len(vocab.words), len(vocab.chars)
        init = (lambda shape: uniform_init(rng, shape)) if rng is not None else np.zeros
        self.word_table = Parameter("embed.word", init((V, word_dim)), decay=True)
        self.char_table = Parameter("embed.char", init((C, char_dim)))
        self.char_fwd = LSTMCell("char.fwd", char_dim, char_hidden, rng)
        self.char_bwd = LSTMCell("char.bwd", char_dim, char_hidden, rng)
        self.char_pad = Parameter("pad.char", init((2 * char_hidden,)))
        self.pretrained_words: list[str] = []
        self.pretrained: Optional[Parameter] = None
        pre_dim = 0
        if pretrained is not None:
            self.pretrained_words = list(pretrained.words)
            self._pretrained_rows = {w: i for i, w in enumerate(self.pretrained_words)}
            self.pretrained = Parameter("embed.pretrained", pretrained.vectors,
                                        trainable=tune_pretrained)
            pre_dim = pretrained.dim
        self.pretrained_dim = pre_dim
        self.input_dim = word_dim + pre_dim + 2 * char_hidden
        self.fwd = LSTMCell("encoder.fwd", self.input_dim, encoder_hidden, rng)
        self.bwd = LSTMCell("encoder.bwd", self.input_dim, encoder_hidden, rng)
        self.output_dim = 2 * encoder_hidden

    def parameters(self) -> list[Parameter]:
        out = [self.word_table]
        if self.pretrained is not None:
            out.append(self.pretrained)
        out += [self.char_table, *self.char_fwd.parameters(), *self.char_bwd.parameters(),
                self.char_pad, *self.fwd.parameters(), *self.bwd.parameters()]
        return out

    def char_encode(self, tape: Tape, form: str) -> Var:
        if not form:
            return tape.param(self.char_pad)
        xs = [tape.lookup(self.char_table, self.vocab.char_id(ch)) for ch in form]
        h_f = self.char_fwd.run(tape, xs)[-1]
        h_b = self.char_bwd.run(tape, xs, reverse=True)[0]
        return tape.concat([h_f, h_b])

    def embed_word(self, tape: Tape, form: str, unk_rng: Optional[np.random.Generator] = None,
                   unk_rate: float = 0.0) -> Var:
        word_id = self.vocab.word_id(form)
        if (unk_rng is not None and unk_rate > 0 and self.vocab.is_singleton(form)
                and unk_rng.random() < unk_rate):
            word_id = UNK_ID
        parts = [tape.lookup(self.word_table, word_id)]
        if self.pretrained is not None:
            row = self._pretrained_rows.get(form.lower())
            if row is None:
                parts.append(tape.constant(np.zeros(self.pretrained_dim)))
            else:
                parts.append(tape.lookup(self.pretrained, row))
        parts.append(self.char_encode(tape, form))
        return tape.concat(parts)

    def encode_sentence(self, tape: Tape, forms: Sequence[str],
                        unk_rng: Optional[np.random.Generator] = None,
                        unk_rate: float = 0.0) -> list[Var]:
        if not forms:
            raise JointParseError("cannot encode an empty sentence")
        xs = [tape.dropout(self.embed_word(tape, f, unk_rng, unk_rate)) for f in forms]
        hf = self.fwd.run(tape, xs)
        hb = self.bwd.run(tape, xs, reverse=True)
        return [tape.concat([a, b]) for a, b in zip(hf, hb)]


class TagEncoder:
    def __init__(self, n_tags: int, tag_dim: int, tag_hidden: int,
                 rng: Optional[np.random.Generator] = None):
        shape = (n_tags, tag_dim)
        self.table = Parameter("embed.tag", uniform_init(rng, shape)
                               if rng is not None else np.zeros(shape))
        self.lstm = LSTMCell("tag_lstm", tag_dim, tag_hidden, rng)
        self.output_dim = tag_hidden

    def parameters(self) -> list[Parameter]:
        return [self.table, *self.lstm.parameters()]


class TagChain:
    """Append-only tag LSTM states; ``vectors[n - 1]`` belongs to word ``n``."""

    def __init__(self, tape: Tape, encoder: TagEncoder, n_words: int):
        self.encoder = encoder
        self.n_words = n_words
        self.h, self.c = encoder.lstm.zero_state(tape)
        self.vectors: list[Var] = []

    def advance(self, tape: Tape, tag_id: int) -> Var:
        if len(self.vectors) >= self.n_words:
            raise JointParseError(f"tag chain already holds {self.n_words} tags")
        x = tape.dropout(tape.lookup(self.encoder.table, tag_id))
        self.h, self.c = tape.lstm_step(self.encoder.lstm, self.h, self.c, x)
        self.vectors.append(self.h)
        return self.h


def tag_state_advance(tape: Tape, chain: TagChain, tag_id: int) -> Var:
    return chain.advance(tape, tag_id)


class Pads:
    """Learned fillers for absent slots, one for word slots and one for tag slots."""

    def __init__(self, word_dim: int, tag_dim: int, rng: Optional[np.random.Generator] = None):
        init = (lambda n: uniform_init(rng, (n,))) if rng is not None else np.zeros
        self.word = Parameter("pad.word", init(word_dim))
        self.tag = Parameter("pad.tag", init(tag_dim))

    def parameters(self) -> list[Parameter]:
        return [self.word, self.tag]


FeatureSlots = list[tuple[str, Var]]


class _Lookup:
    def __init__(self, tape, words, chain, pads):
        self.tape, self.words, self.chain, self.pads = tape, words, chain, pads

    def x(self, i: Optional[int]) -> Var:
        if i is None:
            return self.tape.param(self.pads.word)
        return self.words[i - 1]

    def t(self, i: Optional[int]) -> Var:
        if i is None or i > len(self.chain.vectors):
            return self.tape.param(self.pads.tag)
        return self.chain.vectors[i - 1]


def _stack(c: Configuration, depth: int) -> Optional[int]:
    return c.stack[-1 - depth] if len(c.stack) > depth else None


def _check_kind(c: Configuration, expected: ClassifierKind) -> None:
    kind = classifier_kind(c)
    if kind is not expected:
        raise JointParseError(f"{expected.value} features requested in a {kind.value} configuration")


def extract_tag_features(tape: Tape, c: Configuration, words: Sequence[Var], chain: TagChain,
                         pads: Pads, ablation: AblationConfig) -> FeatureSlots:
    _check_kind(c, ClassifierKind.TAGGING)
    get = _Lookup(tape, words, chain, pads)
    s1, s0 = _stack(c, 1), _stack(c, 0)
    prev = c.n_shifted - 1
    prev = prev if prev >= 1 else None
    b0 = c.buffer[0] if c.buffer else None
    slots: FeatureSlots = []
    if ablation.parse_to_tag:
        slots += [("x_S1", get.x(s1)), ("t_S1", get.t(s1))]
    slots += [("x_B-2", get.x(prev)), ("t_B-2", get.t(prev)), ("x_S0", get.x(s0)),
              ("x_B0", get.x(b0))]
    return slots


def extract_parse_features(tape: Tape, c: Configuration, words: Sequence[Var], chain: TagChain,
                           pads: Pads, ablation: AblationConfig) -> FeatureSlots:
    _check_kind(c, ClassifierKind.STRUCTURAL)
    get = _Lookup(tape, words, chain, pads)
    b0 = c.buffer[0] if c.buffer else None
    slots: FeatureSlots = []
    for depth in (2, 1, 0):
        i = _stack(c, depth)
        slots.append((f"x_S{depth}", get.x(i)))
        if ablation.tag_to_parse:
            slots.append((f"t_S{depth}", get.t(i)))
    slots.append(("x_B0", get.x(b0)))
    return slots


def extract_label_features(tape: Tape, c: Configuration, words: Sequence[Var], chain: TagChain,
                           pads: Pads, ablation: AblationConfig) -> FeatureSlots:
    _check_kind(c, ClassifierKind.LABELING)
    get = _Lookup(tape, words, chain, pads)
    slots: FeatureSlots = []
    for depth in (1, 0):
        i = _stack(c, depth)
        slots.append((f"x_S{depth}", get.x(i)))
        if ablation.tag_to_parse:
            slots.append((f"t_S{depth}", get.t(i)))
    return slots


EXTRACTORS = {
    ClassifierKind.TAGGING: extract_tag_features,
    ClassifierKind.STRUCTURAL: extract_parse_features,
    ClassifierKind.LABELING: extract_label_features,
}


def classifier_init(rng: Optional[np.random.Generator], out_dim: int, in_dim: int) -> np.ndarray:
    if rng is None:
        return np.zeros((out_dim, in_dim))
    return glorot(rng, (out_dim, in_dim), in_dim, out_dim)
