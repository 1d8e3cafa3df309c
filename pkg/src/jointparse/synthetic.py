"""Small synthetic treebanks and models for checks, demos and tests."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .conll import Sentence, Token
from .features import AblationConfig
from .model import Hyperparams, JointModel
from .vocab import build_vocab


def make_sentence(forms, tags, heads, labels) -> Sentence:
    """Sentence from parallel lists; the root's label is written as ``root``."""
    toks = []
    for i, (f, t, h, l) in enumerate(zip(forms, tags, heads, labels), start=1):
        label = "root" if h == 0 and l is None else l
        cols = (str(i), f, "_", t, "_", "_", str(h), label, "_", "_")
        toks.append(Token(i, f, t, h, label, cols))
    return Sentence(tuple(toks))


def example_sentence() -> Sentence:
    """'He won the game' with tags PRP VBD DT NN."""
    return make_sentence(["He", "won", "the", "game"], ["PRP", "VBD", "DT", "NN"],
                         [2, 0, 4, 2], ["nsubj", "root", "det", "dobj"])


def gradcheck_sentence() -> Sentence:
    return make_sentence(["Ab", "cab", "ba"], ["X", "Y", "Z"], [2, 0, 2], ["l", "root", "r"])


TINY_HYPER = dict(word_dim=3, tag_dim=2, char_dim=2, char_hidden=2, encoder_hidden=3,
                  tag_hidden=2, classifier_hidden=4, dropout=0.0, unk_replace=0.0)


def tiny_model(seed: int = 0, sentence: Optional[Sentence] = None,
               ablation: Optional[AblationConfig] = None) -> tuple[JointModel, Sentence]:
    """A randomly initialised full-pipeline model small enough for finite differences."""
    sentence = sentence or gradcheck_sentence()
    vocab = build_vocab([sentence])
    hyper = Hyperparams(seed=seed, **TINY_HYPER)
    model = JointModel(vocab, hyper, ablation, rng=np.random.default_rng(seed))
    # draw every entry from U(-1, 1): biases get exercised and gradients deep in
    # the char path stay well above finite-difference noise
    rng = np.random.default_rng(seed + 1000)
    for p in model.parameters():
        p.value[...] = rng.uniform(-1.0, 1.0, size=p.shape)
    return model, sentence


LEXICON = {
    "DET": ["the", "a", "this", "every"],
    "ADJ": ["red", "big", "old", "quiet", "happy", "small"],
    "NOUN": ["dog", "cat", "man", "park", "book", "tree", "girl", "house", "river", "song"],
    "VERB": ["saw", "likes", "found", "reads", "keeps", "hears"],
    "ADP": ["in", "near", "with", "under"],
}


def _noun_phrase(rng: np.random.Generator, words: list, head: Optional[int], label: str,
                 modifiers: bool = True) -> int:
    """Append ``(DET) (ADJ) NOUN``; returns the noun's 1-based index."""
    start = len(words)
    if modifiers and rng.random() < 0.7:
        words.append(["DET", None, "mod"])
    if modifiers and rng.random() < 0.4:
        words.append(["ADJ", None, "mod"])
    words.append(["NOUN", head, label])
    noun = len(words)
    for w in words[start:noun - 1]:
        w[1] = noun
    return noun


def toy_corpus(n_sentences: int = 50, seed: int = 0) -> list[Sentence]:
    """Projective sentences from a tiny grammar: 30 word types, 5 tags, 4 labels.

    ``NP VERB NOUN ADP NP`` or ``NP VERB NP``.  Verb arguments are ``arg``,
    prenominal words are ``mod``, a preposition attached to the object is
    ``prep`` and its noun is ``pobj``.  The object takes no prenominal words
    when a preposition follows, so every label is recoverable from the head
    and its left stack neighbour at the moment the arc is labeled.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_sentences):
        words: list = []
        subj = _noun_phrase(rng, words, None, "arg")
        words.append(["VERB", 0, None])
        verb = len(words)
        words[subj - 1][1] = verb
        has_pp = rng.random() < 0.5
        obj = _noun_phrase(rng, words, verb, "arg", modifiers=not has_pp)
        if has_pp:
            words.append(["ADP", obj, "prep"])
            adp = len(words)
            _noun_phrase(rng, words, adp, "pobj")
        forms = [LEXICON[tag][rng.integers(len(LEXICON[tag]))] for tag, _, _ in words]
        out.append(make_sentence(forms, [w[0] for w in words], [w[1] for w in words],
                                 [w[2] for w in words]))
    return out
