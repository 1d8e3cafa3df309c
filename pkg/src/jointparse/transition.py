"""Joint tagging/parsing transition system.

A configuration is the quadruple (stack, buffer, tags, arcs).  Five action
types drive it: ``Shift``, ``Left``, ``Right``, ``Tag_t`` and ``Label_l``.
Word indices are 1-based; there is no artificial root node, the single word
left on the stack at the end is the root of the tree.

Everything here is pure: configurations are immutable and ``apply_action``
returns a new one.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import (
    DataError,
    IncompleteAnnotationError,
    NonProjectiveError,
    NoPendingDecision,
    TransitionError,
)


@dataclass(frozen=True)
class DepArc:
    head: int
    modifier: int
    label: Optional[int] = None  # None is the unlabeled marker

    @property
    def labeled(self) -> bool:
        return self.label is not None


@dataclass(frozen=True)
class DepTree:
    """Arcs over words ``1..n_words``; the word without a head is the root."""

    n_words: int
    arcs: tuple[DepArc, ...]

    @classmethod
    def from_heads(cls, heads: Sequence[int], labels: Optional[Sequence] = None) -> "DepTree":
        """Build from a head list where ``heads[i]`` governs word ``i + 1`` (0 = root)."""
        arcs = []
        for m, h in enumerate(heads, start=1):
            if h == 0:
                continue
            arcs.append(DepArc(h, m, None if labels is None else labels[m - 1]))
        return cls(len(heads), tuple(arcs))

    @property
    def heads(self) -> list[int]:
        out = [0] * self.n_words
        for arc in self.arcs:
            out[arc.modifier - 1] = arc.head
        return out

    @property
    def labels(self) -> list:
        out: list = [None] * self.n_words
        for arc in self.arcs:
            out[arc.modifier - 1] = arc.label
        return out

    @property
    def roots(self) -> list[int]:
        attached = {arc.modifier for arc in self.arcs}
        return [i for i in range(1, self.n_words + 1) if i not in attached]

    def canonical(self) -> "DepTree":
        return DepTree(self.n_words, tuple(sorted(self.arcs, key=lambda a: a.modifier)))

    def validate(self) -> None:
        """Raise :class:`DataError` unless the arcs form a single-rooted tree."""
        n = self.n_words
        if n < 1:
            raise DataError("a tree needs at least one word")
        seen = set()
        for arc in self.arcs:
            if not (0 < arc.head <= n and 0 < arc.modifier <= n):
                raise DataError(f"arc {arc.head}->{arc.modifier} out of range 1..{n}")
            if arc.head == arc.modifier:
                raise DataError(f"word {arc.modifier} heads itself")
            if arc.modifier in seen:
                raise DataError(f"word {arc.modifier} has two heads")
            seen.add(arc.modifier)
        if len(self.arcs) != n - 1:
            raise DataError(f"expected {n - 1} arcs for {n} words, got {len(self.arcs)}")
        heads = self.heads
        for start in range(1, n + 1):
            node, steps = start, 0
            while heads[node - 1] != 0:
                node = heads[node - 1]
                steps += 1
                if steps > n:
                    raise DataError(f"cycle through word {start}")


class ActionKind(enum.IntEnum):
    SHIFT = 0
    LEFT = 1
    RIGHT = 2
    TAG = 3
    LABEL = 4


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    payload: Optional[int] = None

    def name(self, tag_names: Optional[Sequence[str]] = None,
             label_names: Optional[Sequence[str]] = None) -> str:
        """Transition name as printed in derivation traces, e.g. ``Tag_PRP``."""
        if self.kind is ActionKind.SHIFT:
            return "Shift"
        if self.kind is ActionKind.LEFT:
            return "Left"
        if self.kind is ActionKind.RIGHT:
            return "Right"
        names = tag_names if self.kind is ActionKind.TAG else label_names
        value = names[self.payload] if names is not None else self.payload
        prefix = "Tag" if self.kind is ActionKind.TAG else "Label"
        return f"{prefix}_{value}"

    def __str__(self) -> str:
        return self.name()


SHIFT = Action(ActionKind.SHIFT)
LEFT = Action(ActionKind.LEFT)
RIGHT = Action(ActionKind.RIGHT)
STRUCTURAL_ACTIONS = (SHIFT, LEFT, RIGHT)


def Tag(tag_id: int) -> Action:
    return Action(ActionKind.TAG, tag_id)


def Label(label_id: int) -> Action:
    return Action(ActionKind.LABEL, label_id)


class ClassifierKind(enum.Enum):
    STRUCTURAL = "structural"
    TAGGING = "tagging"
    LABELING = "labeling"


@dataclass(frozen=True)
class Configuration:
    n_words: int
    stack: tuple[int, ...]
    buffer: tuple[int, ...]
    tags: tuple[int, ...]
    arcs: tuple[DepArc, ...]

    @classmethod
    def initial(cls, n_words: int) -> "Configuration":
        if n_words < 1:
            raise DataError("sentence must contain at least one word")
        return cls(n_words, (), tuple(range(1, n_words + 1)), (), ())

    @property
    def n_shifted(self) -> int:
        return self.n_words - len(self.buffer)

    # Table-1 style conditions
    @property
    def all_shifted_tagged(self) -> bool:
        return len(self.tags) == self.n_shifted

    @property
    def awaiting_tag(self) -> bool:
        return len(self.tags) == self.n_shifted - 1

    @property
    def last_arc_labeled(self) -> bool:
        # vacuously true before the first arc
        return not self.arcs or self.arcs[-1].label is not None


def is_terminal(c: Configuration) -> bool:
    return (len(c.stack) == 1 and not c.buffer and len(c.tags) == c.n_words
            and c.last_arc_labeled)


def classifier_kind(c: Configuration) -> ClassifierKind:
    if is_terminal(c):
        raise NoPendingDecision("no pending decision: configuration is terminal")
    if c.awaiting_tag:
        return ClassifierKind.TAGGING
    if not c.last_arc_labeled:
        return ClassifierKind.LABELING
    return ClassifierKind.STRUCTURAL


def _violation(c: Configuration, a: Action) -> Optional[str]:
    """Name of the first violated condition for ``a`` in ``c``, or None if legal."""
    kind = a.kind
    if kind is ActionKind.TAG:
        return None if c.awaiting_tag else "|T| = N - |B| - 1"
    if kind is ActionKind.LABEL:
        return None if not c.last_arc_labeled else "D[-1].l = unlabeled"
    if kind is ActionKind.SHIFT and not c.buffer:
        return "|B| > 0"
    if kind in (ActionKind.LEFT, ActionKind.RIGHT) and len(c.stack) <= 1:
        return "|S| > 1"
    if not c.all_shifted_tagged:
        return "|T| = N - |B|"
    if not c.last_arc_labeled:
        return "D[-1].l != unlabeled"
    return None


def is_legal(c: Configuration, a: Action) -> bool:
    return _violation(c, a) is None


def legal_actions(c: Configuration, n_tags: int, n_labels: int) -> list[Action]:
    """All legal actions in canonical order (structural, then tags, then labels)."""
    out = [a for a in STRUCTURAL_ACTIONS if _violation(c, a) is None]
    if c.awaiting_tag:
        out.extend(Tag(t) for t in range(n_tags))
    if not c.last_arc_labeled:
        out.extend(Label(l) for l in range(n_labels))
    return out


def apply_action(c: Configuration, a: Action) -> Configuration:
    problem = _violation(c, a)
    if problem is not None:
        raise TransitionError(f"{a} is illegal: condition {problem} does not hold",
                              condition=problem)
    kind = a.kind
    if kind is ActionKind.SHIFT:
        return Configuration(c.n_words, c.stack + c.buffer[:1], c.buffer[1:], c.tags, c.arcs)
    if kind is ActionKind.LEFT:
        *rest, m, h = c.stack
        return Configuration(c.n_words, (*rest, h), c.buffer, c.tags, c.arcs + (DepArc(h, m),))
    if kind is ActionKind.RIGHT:
        *rest, h, m = c.stack
        return Configuration(c.n_words, (*rest, h), c.buffer, c.tags, c.arcs + (DepArc(h, m),))
    if kind is ActionKind.TAG:
        return Configuration(c.n_words, c.stack, c.buffer, c.tags + (a.payload,), c.arcs)
    last = c.arcs[-1]
    labeled = DepArc(last.head, last.modifier, a.payload)
    return Configuration(c.n_words, c.stack, c.buffer, c.tags, c.arcs[:-1] + (labeled,))


def replay(actions: Iterable[Action], n_words: int) -> tuple[tuple[int, ...], DepTree]:
    """Run ``actions`` from the initial configuration; return final tags and tree."""
    c = Configuration.initial(n_words)
    for step, a in enumerate(actions, start=1):
        problem = _violation(c, a)
        if problem is not None:
            raise TransitionError(f"{a} is illegal: condition {problem} does not hold",
                                  step=step, condition=problem)
        c = apply_action(c, a)
    if not is_terminal(c):
        raise TransitionError("action sequence ends before a terminal configuration")
    return c.tags, DepTree(n_words, c.arcs).canonical()


def derivation_length(n_words: int) -> int:
    return 4 * n_words - 2


def oracle_sequence(tags: Sequence[Optional[int]], tree: DepTree) -> list[Action]:
    """Static shortest-stack oracle for a gold tag sequence and projective tree.

    Reduces the top two stack items as soon as they are linked by a gold arc
    whose modifier has already collected all of its own dependents.
    """
    from .projectivity import is_projective

    n = tree.n_words
    if len(tags) != n or any(t is None for t in tags):
        raise IncompleteAnnotationError("every word needs a gold tag")
    tree.validate()
    heads = tree.heads
    labels = tree.labels
    if any(labels[arc.modifier - 1] is None for arc in tree.arcs):
        raise IncompleteAnnotationError("every arc needs a gold label")
    if not is_projective(tree):
        raise NonProjectiveError("gold tree is non-projective; projectivize it first")

    missing = [0] * (n + 1)
    for h in heads:
        missing[h] += 1

    c = Configuration.initial(n)
    out: list[Action] = []
    while not is_terminal(c):
        kind = classifier_kind(c)
        if kind is ClassifierKind.TAGGING:
            a = Tag(tags[c.stack[-1] - 1])
        elif kind is ClassifierKind.LABELING:
            a = Label(labels[c.arcs[-1].modifier - 1])
        else:
            a = SHIFT
            if len(c.stack) >= 2:
                s1, s0 = c.stack[-2], c.stack[-1]
                left = heads[s1 - 1] == s0 and missing[s1] == 0
                right = heads[s0 - 1] == s1 and missing[s0] == 0
                assert not (left and right), "gold arcs in both directions"
                if left:
                    a = LEFT
                    missing[s0] -= 1
                elif right:
                    a = RIGHT
                    missing[s1] -= 1
            if a is SHIFT and not c.buffer:
                raise NonProjectiveError("oracle is stuck; tree is not derivable")
        out.append(a)
        c = apply_action(c, a)
    return out
