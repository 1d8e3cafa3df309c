"""The joint tagging and parsing model, its loss, greedy decoder and trainer."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Optional, Sequence

import numpy as np

from .conll import Sentence
from .errors import DataError, JointParseError, NonProjectiveError
from .evaluation import EvalReport, score
from .features import (
    EXTRACTORS,
    AblationConfig,
    Pads,
    TagChain,
    TagEncoder,
    WordEncoder,
    classifier_init,
    input_dim,
)
from .neural import (
    Parameter,
    Tape,
    Var,
    adam_step,
    clip_global_norm,
    softmax,
    zero_grad,
)
from .projectivity import is_projective
from .transition import (
    LEFT,
    RIGHT,
    SHIFT,
    Action,
    ActionKind,
    ClassifierKind,
    Configuration,
    DepTree,
    Label,
    Tag,
    apply_action,
    classifier_kind,
    is_terminal,
    oracle_sequence,
)
from .vocab import PretrainedEmbeddings, Vocab

logger = logging.getLogger(__name__)

STRUCTURAL_CLASSES = (SHIFT, LEFT, RIGHT)


@dataclass
class Hyperparams:
    word_dim: int = 150
    tag_dim: int = 50
    char_dim: int = 50
    classifier_hidden: int = 300
    encoder_hidden: int = 200
    tag_hidden: int = 100
    char_hidden: int = 50
    activation: str = "relu"
    clip_norm: float = 5.0
    l2_lambda: float = 1e-8
    l2_embeddings: bool = True
    dropout: float = 0.25
    beta1: float = 0.9
    beta2: float = 0.9
    epsilon: float = 1e-8
    learning_rate: float = 1e-3
    epochs: int = 30
    seed: int = 1
    unk_replace: float = 0.25
    min_word_count: int = 1
    tune_pretrained: bool = False

    def __post_init__(self):
        for name in ("word_dim", "tag_dim", "char_dim", "classifier_hidden", "encoder_hidden",
                     "tag_hidden", "char_hidden", "epochs", "min_word_count"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("clip_norm", "learning_rate", "epsilon"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.dropout < 1:
            raise ValueError("dropout must be in [0, 1)")
        if not 0 <= self.unk_replace < 1:
            raise ValueError("unk_replace must be in [0, 1)")
        if self.l2_lambda < 0:
            raise ValueError("l2_lambda must be non-negative")
        if self.activation not in ("relu", "identity"):
            raise ValueError(f"unknown activation {self.activation!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


class Classifier:
    """One hidden layer followed by a softmax layer."""

    def __init__(self, name: str, in_dim: int, hidden: int, n_classes: int,
                 rng: Optional[np.random.Generator], activation: str = "relu"):
        self.name = name
        self.in_dim, self.n_classes = in_dim, n_classes
        self.activation = activation
        self.W1 = Parameter(f"{name}.W1", classifier_init(rng, hidden, in_dim))
        self.b1 = Parameter(f"{name}.b1", np.zeros(hidden))
        self.W2 = Parameter(f"{name}.W2", classifier_init(rng, n_classes, hidden))
        self.b2 = Parameter(f"{name}.b2", np.zeros(n_classes))

    def parameters(self) -> list[Parameter]:
        return [self.W1, self.b1, self.W2, self.b2]

    def logits(self, tape: Tape, x: Var) -> Var:
        h = tape.linear(self.W1, self.b1, x)
        if self.activation == "relu":
            h = tape.relu(h)
        h = tape.dropout(h)
        return tape.linear(self.W2, self.b2, h)


class JointModel:
    def __init__(self, vocab: Vocab, hyper: Optional[Hyperparams] = None,
                 ablation: Optional[AblationConfig] = None,
                 pretrained: Optional[PretrainedEmbeddings] = None,
                 rng: Optional[np.random.Generator] = None, init: str = "random"):
        """``init="zero"`` sets every parameter to zero (used by closed-form tests)."""
        self.vocab = vocab
        self.hyper = hyper or Hyperparams()
        self.ablation = ablation or AblationConfig()
        if vocab.n_tags < 1:
            raise DataError("tag inventory is empty")
        hp = self.hyper
        if init == "zero":
            rng = None
        elif rng is None:
            rng = np.random.default_rng(hp.seed)
        self.encoder = WordEncoder(vocab, hp.word_dim, hp.char_dim, hp.char_hidden,
                                   hp.encoder_hidden, pretrained, hp.tune_pretrained, rng)
        self.tagger = TagEncoder(vocab.n_tags, hp.tag_dim, hp.tag_hidden, rng)
        dx, dt = self.encoder.output_dim, self.tagger.output_dim
        self.pads = Pads(dx, dt, rng)
        ab = self.ablation
        self.classifiers = {
            ClassifierKind.TAGGING: Classifier(
                "tag", input_dim(ClassifierKind.TAGGING, ab, dx, dt), hp.classifier_hidden,
                vocab.n_tags, rng, hp.activation),
            ClassifierKind.STRUCTURAL: Classifier(
                "parse", input_dim(ClassifierKind.STRUCTURAL, ab, dx, dt), hp.classifier_hidden,
                3, rng, hp.activation),
            ClassifierKind.LABELING: Classifier(
                "label", input_dim(ClassifierKind.LABELING, ab, dx, dt), hp.classifier_hidden,
                max(vocab.n_labels, 1), rng, hp.activation),
        }
        if not hp.l2_embeddings:
            for p in self.parameters():
                if p.name.startswith("embed."):
                    p.decay = False

    def parameters(self) -> list[Parameter]:
        out = self.encoder.parameters() + self.tagger.parameters() + self.pads.parameters()
        for kind in (ClassifierKind.TAGGING, ClassifierKind.STRUCTURAL, ClassifierKind.LABELING):
            out += self.classifiers[kind].parameters()
        return out

    def trainable_parameters(self) -> list[Parameter]:
        return [p for p in self.parameters() if p.trainable]

    def named_parameters(self) -> dict[str, Parameter]:
        return {p.name: p for p in self.parameters()}

    @property
    def pretrained_words(self) -> list[str]:
        return self.encoder.pretrained_words

    def zero_(self) -> "JointModel":
        for p in self.parameters():
            p.value.fill(0.0)
        return self

    def round_to_float32(self) -> None:
        for p in self.parameters():
            p.value[...] = p.value.astype(np.float32)

    def snapshot(self) -> dict[str, np.ndarray]:
        return {p.name: p.value.copy() for p in self.parameters()}

    def restore(self, values: dict[str, np.ndarray]) -> None:
        for p in self.parameters():
            p.value[...] = values[p.name]

    # gold conversion

    def gold_ids(self, sentence: Sentence) -> tuple[list[int], DepTree]:
        if any(t is None for t in sentence.tags):
            raise DataError("sentence lacks gold tags")
        tags = [self.vocab.tag_id(t) for t in sentence.tags]
        tree = sentence.tree()
        labels = [None if h == 0 or l is None else self.vocab.label_id(l)
                  for h, l in zip(tree.heads, tree.labels)]
        return tags, DepTree.from_heads(tree.heads, labels)

    def oracle(self, sentence: Sentence) -> list[Action]:
        tags, tree = self.gold_ids(sentence)
        return oracle_sequence(tags, tree)

    # decoding state

    def start(self, tape: Tape, forms: Sequence[str],
              unk_rng: Optional[np.random.Generator] = None) -> "DecodeState":
        rate = self.hyper.unk_replace if unk_rng is not None else 0.0
        words = self.encoder.encode_sentence(tape, forms, unk_rng, rate)
        return DecodeState(Configuration.initial(len(forms)), words,
                           TagChain(tape, self.tagger, len(forms)))

    def logits(self, tape: Tape, state: "DecodeState") -> tuple[ClassifierKind, Var]:
        kind = classifier_kind(state.config)
        slots = EXTRACTORS[kind](tape, state.config, state.words, state.chain, self.pads,
                                 self.ablation)
        return kind, self.classifiers[kind].logits(tape, tape.concat([v for _, v in slots]))

    def action_index(self, action: Action) -> int:
        if action.kind in (ActionKind.TAG, ActionKind.LABEL):
            return action.payload
        return int(action.kind)

    def action_for(self, kind: ClassifierKind, index: int) -> Action:
        if kind is ClassifierKind.TAGGING:
            return Tag(index)
        if kind is ClassifierKind.LABELING:
            return Label(index)
        return STRUCTURAL_CLASSES[index]

    def loss(self, tape: Tape, sentence: Sentence,
             unk_rng: Optional[np.random.Generator] = None) -> Var:
        """Teacher-forced negative log-likelihood of the gold derivation."""
        actions = self.oracle(sentence)
        state = self.start(tape, sentence.forms, unk_rng)
        losses = []
        for a in actions:
            _, logits = self.logits(tape, state)
            _, step_loss = tape.softmax_xent(logits, self.action_index(a))
            losses.append(step_loss)
            state.advance(tape, a)
        return tape.sum(losses)


@dataclass
class DecodeState:
    config: Configuration
    words: list[Var]
    chain: TagChain
    log_prob: float = 0.0
    actions: list[Action] = field(default_factory=list)

    @property
    def terminal(self) -> bool:
        return is_terminal(self.config)

    def advance(self, tape: Tape, action: Action) -> None:
        self.config = apply_action(self.config, action)
        if action.kind is ActionKind.TAG:
            self.chain.advance(tape, action.payload)
        self.actions.append(action)


def structural_mask(config: Configuration) -> np.ndarray:
    """Legal-structure mask over (Shift, Left, Right) at decode time."""
    return np.array([bool(config.buffer), len(config.stack) > 1, len(config.stack) > 1])


def action_distribution(model: JointModel, state: DecodeState, tape: Optional[Tape] = None,
                        mask: bool = True) -> tuple[ClassifierKind, np.ndarray]:
    """Class probabilities of the classifier responsible for ``state``.

    With ``mask`` the structural distribution is renormalised over actions whose
    structural preconditions hold; training never masks.
    """
    tape = tape or Tape(record=False)
    kind, logits = model.logits(tape, state)
    probs = softmax(logits.value)
    if mask and kind is ClassifierKind.STRUCTURAL:
        probs = np.where(structural_mask(state.config), probs, 0.0)
        probs = probs / probs.sum()
    return kind, probs


def sentence_nll(model: JointModel, sentence: Sentence) -> float:
    tape = Tape(record=False)
    return float(model.loss(tape, sentence).value)


@dataclass
class DecodeResult:
    tags: tuple[int, ...]
    tree: DepTree
    actions: list[Action]
    log_prob: float

    def to_sentence(self, sentence: Sentence, vocab: Vocab, root_label: str = "root") -> Sentence:
        heads = self.tree.heads
        labels = [root_label if h == 0 else vocab.labels[l]
                  for h, l in zip(heads, self.tree.labels)]
        return sentence.with_annotation([vocab.tags[t] for t in self.tags], heads, labels)


def greedy_decode(model: JointModel, forms: Sequence[str] | Sentence) -> DecodeResult:
    if isinstance(forms, Sentence):
        forms = forms.forms
    tape = Tape(record=False)
    state = model.start(tape, forms)
    while not state.terminal:
        kind, probs = action_distribution(model, state, tape)
        best = int(np.argmax(probs))  # first maximum, so ties go to the lowest index
        state.log_prob += math.log(probs[best]) if probs[best] > 0 else -math.inf
        state.advance(tape, model.action_for(kind, best))
    return DecodeResult(state.config.tags, DepTree(len(forms), state.config.arcs).canonical(),
                        state.actions, state.log_prob)


def decode_corpus(model: JointModel, sentences: Sequence[Sentence],
                  root_label: str = "root") -> list[Sentence]:
    return [greedy_decode(model, s).to_sentence(s, model.vocab, root_label) for s in sentences]


@dataclass
class EpochStats:
    epoch: int
    loss: float
    dev: Optional[EvalReport] = None


@dataclass
class TrainResult:
    model: JointModel
    history: list[EpochStats]
    best_epoch: int


def check_trainable(sentences: Sequence[Sentence]) -> None:
    for k, s in enumerate(sentences, start=1):
        if not is_projective(s.tree()):
            raise NonProjectiveError(f"training sentence {k} is non-projective; projectivize it")


def train(model: JointModel, sentences: Sequence[Sentence],
          dev: Optional[Sequence[Sentence]] = None,
          on_epoch: Optional[Callable[[EpochStats], None]] = None) -> TrainResult:
    """Per-sentence Adam training with global-norm clipping.

    After each epoch the dev set (if any) is decoded; the parameters with the
    best dev LAS are restored at the end.  Final values are rounded to float32.
    """
    sentences = list(sentences)
    if not sentences:
        raise DataError("training corpus is empty")
    check_trainable(sentences)
    hp = model.hyper
    rng = np.random.default_rng(hp.seed + 1)
    params = model.trainable_parameters()
    history: list[EpochStats] = []
    best_las, best_epoch, best_values = -1.0, 0, None
    for epoch in range(1, hp.epochs + 1):
        total = 0.0
        for k in rng.permutation(len(sentences)):
            tape = Tape(record=True, training=True, rng=rng, dropout=hp.dropout)
            loss = model.loss(tape, sentences[k], unk_rng=rng)
            total += float(loss.value)
            tape.backward(loss)
            clip_global_norm(params, hp.clip_norm)
            adam_step(params, hp.learning_rate, hp.beta1, hp.beta2, hp.epsilon, hp.l2_lambda)
            zero_grad(params)
        stats = EpochStats(epoch, total)
        if dev:
            stats.dev = score(dev, decode_corpus(model, dev))
            if stats.dev.las > best_las:
                best_las, best_epoch, best_values = stats.dev.las, epoch, model.snapshot()
        history.append(stats)
        if stats.dev is not None:
            logger.info("epoch %d loss %.4f dev %s", epoch, total, stats.dev.line())
        else:
            logger.info("epoch %d loss %.4f", epoch, total)
        if on_epoch is not None:
            on_epoch(stats)
    if best_values is not None:
        model.restore(best_values)
    else:
        best_epoch = hp.epochs
    model.round_to_float32()
    return TrainResult(model, history, best_epoch)


def hyper_to_dict(hp: Hyperparams) -> dict:
    return asdict(hp)
