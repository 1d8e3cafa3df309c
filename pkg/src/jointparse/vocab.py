"""Vocabularies for words, characters, tags and labels, plus pretrained vectors."""

from __future__ import annotations

import logging
import os
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .conll import Corpus, Sentence
from .errors import DataError, EmbeddingFormatError

logger = logging.getLogger(__name__)

PAD = "<pad>"
UNK = "<unk>"
PAD_ID, UNK_ID = 0, 1


def _index(items: Iterable[str]) -> dict[str, int]:
    return {item: i for i, item in enumerate(items)}


class Vocab:
    """Dense id maps.  Word keys are lowercased; characters keep their case.

    Word and character ids 0 and 1 are reserved for padding and unknown.  Tags
    and labels have no reserved entries since they are classifier outputs.
    """

    def __init__(self, words: list[str], chars: list[str], tags: list[str], labels: list[str],
                 word_counts: Optional[dict[str, int]] = None, min_word_count: int = 1):
        if words[:2] != [PAD, UNK] or chars[:2] != [PAD, UNK]:
            raise DataError("word and char inventories must start with <pad>, <unk>")
        self.words, self.chars, self.tags, self.labels = words, chars, tags, labels
        self.word_counts = Counter(word_counts or {})
        self.min_word_count = min_word_count
        self._words, self._chars = _index(words), _index(chars)
        self._tags, self._labels = _index(tags), _index(labels)

    @property
    def n_tags(self) -> int:
        return len(self.tags)

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def word_id(self, form: str) -> int:
        key = form.lower()
        i = self._words.get(key, UNK_ID)
        if i > UNK_ID and self.word_counts.get(key, 0) < self.min_word_count:
            return UNK_ID
        return i

    def char_id(self, ch: str) -> int:
        return self._chars.get(ch, UNK_ID)

    def tag_id(self, tag: str) -> int:
        try:
            return self._tags[tag]
        except KeyError:
            raise DataError(f"tag {tag!r} is not in the tag inventory") from None

    def label_id(self, label: str) -> int:
        try:
            return self._labels[label]
        except KeyError:
            raise DataError(f"label {label!r} is not in the label inventory") from None

    def is_singleton(self, form: str) -> bool:
        return self.word_counts.get(form.lower(), 0) == 1

    def to_dict(self) -> dict:
        return {
            "words": self.words, "chars": self.chars, "tags": self.tags,
            "labels": self.labels, "word_counts": dict(self.word_counts),
            "min_word_count": self.min_word_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Vocab":
        return cls(list(d["words"]), list(d["chars"]), list(d["tags"]), list(d["labels"]),
                   d.get("word_counts"), int(d.get("min_word_count", 1)))


def build_vocab(sentences: Iterable[Sentence], min_word_count: int = 1) -> Vocab:
    sentences = list(sentences.sentences if isinstance(sentences, Corpus) else sentences)
    if not sentences:
        raise DataError("cannot build a vocabulary from an empty corpus")
    counts: Counter = Counter()
    chars: dict[str, None] = {}
    tags: dict[str, None] = {}
    labels: dict[str, None] = {}
    for sent in sentences:
        for tok in sent.tokens:
            counts[tok.form.lower()] += 1
            for ch in tok.form:
                chars.setdefault(ch)
            if tok.tag is not None:
                tags.setdefault(tok.tag)
            if tok.head not in (None, 0) and tok.label is not None:
                labels.setdefault(tok.label)
    # first-occurrence order keeps ids stable for a given corpus
    words = [PAD, UNK] + [w for w in counts if w not in (PAD, UNK)]
    return Vocab(words, [PAD, UNK] + [c for c in chars if c not in (PAD, UNK)],
                 list(tags), list(labels), dict(counts), min_word_count)


@dataclass
class PretrainedEmbeddings:
    """Rows of a pretrained table, restricted to in-vocabulary words."""

    words: list[str]
    vectors: np.ndarray
    found: int = 0
    total: int = 0

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __post_init__(self):
        self._rows = _index(self.words)

    def row(self, form: str) -> Optional[int]:
        return self._rows.get(form.lower())

    @property
    def coverage(self) -> float:
        return self.found / self.total if self.total else 0.0


def load_pretrained(path: str | os.PathLike, vocab: Optional[Vocab] = None) -> PretrainedEmbeddings:
    """Read a whitespace-separated text embedding file.

    A leading ``count dim`` header line is detected and skipped.  All rows must
    have the dimension of the first data row.
    """
    wanted = None if vocab is None else set(vocab.words[2:])
    words: list[str] = []
    seen: set[str] = set()
    rows: list[list[float]] = []
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\r\n").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                continue
            values = parts[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise EmbeddingFormatError("row has no values", lineno)
            elif len(values) != dim:
                raise EmbeddingFormatError(f"expected {dim} values, found {len(values)}", lineno)
            key = parts[0].lower()
            if wanted is not None and key not in wanted:
                continue
            if key in seen:
                continue
            try:
                rows.append([float(v) for v in values])
            except ValueError:
                raise EmbeddingFormatError("non-numeric value", lineno) from None
            words.append(key)
            seen.add(key)
            if wanted is not None:
                wanted.discard(key)
    if dim is None:
        raise EmbeddingFormatError("embedding file contains no vectors")
    total = len(vocab.words) - 2 if vocab is not None else len(words)
    table = PretrainedEmbeddings(words, np.array(rows, dtype=np.float64).reshape(len(rows), dim),
                                 len(words), total)
    logger.info("pretrained embeddings: dim %d, %d/%d vocabulary words covered (%.1f%%)",
                dim, table.found, table.total, 100 * table.coverage)
    return table
