"""CoNLL-U / CoNLL-X treebank reading and writing.

Only ID, FORM, the tag in column 4, HEAD and DEPREL are interpreted; the
remaining columns are carried through untouched.  Comment lines, multiword
token ranges (``3-4``) and empty nodes (``5.1``) are skipped on read.
"""

from __future__ import annotations

import io
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Optional, Sequence, TextIO, Union

from .errors import ConllFormatError, DataError, IncompleteAnnotationError
from .transition import DepTree

logger = logging.getLogger(__name__)

DIALECTS = ("conllu", "conllx")
TAG_COL, HEAD_COL, LABEL_COL = 3, 6, 7


@dataclass(frozen=True)
class Token:
    index: int
    form: str
    tag: Optional[str] = None
    head: Optional[int] = None
    label: Optional[str] = None
    columns: tuple[str, ...] = ()  # original 10 columns, for passthrough

    @property
    def is_root(self) -> bool:
        return self.head == 0


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    comments: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def tags(self) -> list[Optional[str]]:
        return [t.tag for t in self.tokens]

    @property
    def heads(self) -> list[Optional[int]]:
        return [t.head for t in self.tokens]

    @property
    def labels(self) -> list[Optional[str]]:
        return [t.label for t in self.tokens]

    @property
    def has_tree(self) -> bool:
        return all(t.head is not None for t in self.tokens)

    def tree(self) -> DepTree:
        """Gold tree with string labels; the root word's label is dropped."""
        if not self.has_tree:
            raise IncompleteAnnotationError("sentence has tokens without a head")
        labels = [None if t.head == 0 else t.label for t in self.tokens]
        return DepTree.from_heads(self.heads, labels)

    def with_annotation(self, tags: Sequence[Optional[str]], heads: Sequence[Optional[int]],
                        labels: Sequence[Optional[str]]) -> "Sentence":
        if not (len(tags) == len(heads) == len(labels) == len(self.tokens)):
            raise DataError("annotation length does not match sentence length")
        toks = tuple(replace(t, tag=tg, head=h, label=l)
                     for t, tg, h, l in zip(self.tokens, tags, heads, labels))
        return Sentence(toks, self.comments)

    def with_tree(self, tree: DepTree, root_label: Optional[str] = None) -> "Sentence":
        labels = [root_label if h == 0 else l for h, l in zip(tree.heads, tree.labels)]
        return self.with_annotation(self.tags, tree.heads, labels)


@dataclass
class Corpus:
    sentences: list[Sentence] = field(default_factory=list)
    path: Optional[str] = None

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)

    def __getitem__(self, i):
        return self.sentences[i]

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    @property
    def n_nonprojective(self) -> int:
        from .projectivity import is_projective
        return sum(1 for s in self.sentences if s.has_tree and not is_projective(s.tree()))


def _field(value: str) -> Optional[str]:
    return None if value == "_" else value


def _parse_block(rows: list[tuple[int, str]], comments: list[str],
                 path: Optional[str]) -> Sentence:
    tokens = []
    for lineno, line in rows:
        cols = line.split("\t")
        if len(cols) != 10:
            cols = line.split()
        if len(cols) != 10:
            raise ConllFormatError(f"expected 10 columns, found {len(cols)}", lineno, path)
        try:
            index = int(cols[0])
        except ValueError:
            raise ConllFormatError(f"bad token id {cols[0]!r}", lineno, path) from None
        if index != len(tokens) + 1:
            raise ConllFormatError(f"token id {index} out of sequence", lineno, path)
        head: Optional[int] = None
        if cols[HEAD_COL] != "_":
            try:
                head = int(cols[HEAD_COL])
            except ValueError:
                raise ConllFormatError(f"bad head {cols[HEAD_COL]!r}", lineno, path) from None
        tokens.append((lineno, Token(index, cols[1], _field(cols[TAG_COL]), head,
                                     _field(cols[LABEL_COL]), tuple(cols))))
    n = len(tokens)
    for lineno, tok in tokens:
        if tok.head is None:
            continue
        if not 0 <= tok.head <= n or tok.head == tok.index:
            raise ConllFormatError(f"head {tok.head} out of range for {n} tokens",
                                   lineno, path)
    return Sentence(tuple(t for _, t in tokens), tuple(comments))


def iter_conll(source: Union[str, os.PathLike, TextIO, Iterable[str]],
               dialect: str = "conllu") -> Iterator[Sentence]:
    if dialect not in DIALECTS:
        raise ValueError(f"unknown dialect {dialect!r}; expected one of {DIALECTS}")
    path = None
    if isinstance(source, (str, os.PathLike)):
        path = os.fspath(source)
        with open(path, encoding="utf-8", newline="") as fh:
            yield from _iter_lines(fh, path)
        return
    yield from _iter_lines(source, path)


def _iter_lines(lines: Iterable[str], path: Optional[str]) -> Iterator[Sentence]:
    rows: list[tuple[int, str]] = []
    comments: list[str] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            if rows:
                yield _parse_block(rows, comments, path)
            elif comments:
                raise ConllFormatError("comment block without tokens", lineno, path)
            rows, comments = [], []
            continue
        if line.startswith("#"):
            if rows:
                raise ConllFormatError("comment inside a token block", lineno, path)
            comments.append(line)
            continue
        first = line.split("\t", 1)[0].split(None, 1)[0]
        if "-" in first or "." in first:
            continue
        rows.append((lineno, line))
    if rows:
        yield _parse_block(rows, comments, path)


def read_conll(source, dialect: str = "conllu") -> Corpus:
    path = os.fspath(source) if isinstance(source, (str, os.PathLike)) else None
    corpus = Corpus(list(iter_conll(source, dialect)), path)
    logger.info("read %d sentences, %d tokens from %s", len(corpus), corpus.n_tokens,
                path or "<stream>")
    return corpus


def _format_token(tok: Token, require_complete: bool) -> str:
    if require_complete:
        if tok.head is None:
            raise IncompleteAnnotationError(f"token {tok.index} has no head")
        if tok.head != 0 and tok.label is None:
            raise IncompleteAnnotationError(
                f"token {tok.index} is attached by an unlabeled arc")
    cols = list(tok.columns) if len(tok.columns) == 10 else ["_"] * 10
    cols[0] = str(tok.index)
    cols[1] = tok.form
    cols[TAG_COL] = tok.tag if tok.tag is not None else "_"
    cols[HEAD_COL] = str(tok.head) if tok.head is not None else "_"
    cols[LABEL_COL] = tok.label if tok.label is not None else "_"
    return "\t".join(cols)


def write_conll(sentences: Iterable[Sentence], stream: TextIO, dialect: str = "conllu",
                require_complete: bool = True) -> None:
    """Write sentences with LF line endings; refuses trees with missing heads or labels."""
    if dialect not in DIALECTS:
        raise ValueError(f"unknown dialect {dialect!r}; expected one of {DIALECTS}")
    for sent in sentences:
        lines = list(sent.comments)
        lines.extend(_format_token(tok, require_complete) for tok in sent.tokens)
        stream.write("\n".join(lines) + "\n\n")


def format_conll(sentences: Iterable[Sentence], dialect: str = "conllu",
                 require_complete: bool = True) -> str:
    buf = io.StringIO()
    write_conll(sentences, buf, dialect, require_complete)
    return buf.getvalue()
