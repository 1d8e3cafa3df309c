"""Projectivity checks, arc lifting and brute-force tree enumeration."""

from __future__ import annotations

import itertools
from typing import Iterator

from .transition import DepArc, DepTree


def _is_descendant(heads: list[int], node: int, ancestor: int) -> bool:
    while node != 0:
        if node == ancestor:
            return True
        node = heads[node - 1]
    return False


def _nonprojective_arcs(heads: list[int]) -> list[tuple[int, int]]:
    """``(head, modifier)`` pairs whose span contains a non-descendant of the head."""
    bad = []
    for m, h in enumerate(heads, start=1):
        if h == 0:
            continue
        lo, hi = (h, m) if h < m else (m, h)
        for k in range(lo + 1, hi):
            if not _is_descendant(heads, k, h):
                bad.append((h, m))
                break
    return bad


def is_projective(tree: DepTree) -> bool:
    return not _nonprojective_arcs(tree.heads)


def projectivize(tree: DepTree) -> DepTree:
    """Lift non-projective arcs to the grandparent until the tree is projective.

    The shortest offending arc is lifted first (leftmost on ties).  Labels
    stay with their modifiers.  A projective input is returned as is.
    """
    heads = tree.heads
    bad = _nonprojective_arcs(heads)
    if not bad:
        return tree
    labels = tree.labels
    while bad:
        h, m = min(bad, key=lambda arc: (abs(arc[0] - arc[1]), min(arc)))
        # arcs leaving the root word are always projective, so h has a head
        heads[m - 1] = heads[h - 1]
        bad = _nonprojective_arcs(heads)
    return DepTree.from_heads(heads, labels)


def lifted_words(before: DepTree, after: DepTree) -> list[int]:
    return [i for i, (a, b) in enumerate(zip(before.heads, after.heads), start=1) if a != b]


def _check_size(n_words: int) -> None:
    if not 1 <= n_words <= 7:
        raise ValueError(f"tree enumeration supports 1 <= N <= 7, got {n_words}")


def enumerate_trees(n_words: int) -> Iterator[tuple[int, ...]]:
    """All single-rooted head assignments over ``n_words`` words (0 marks the root)."""
    _check_size(n_words)
    words = range(1, n_words + 1)
    for root in words:
        choices = [[0] if m == root else [h for h in words if h != m] for m in words]
        for heads in itertools.product(*choices):
            if _acyclic(heads):
                yield heads


def _acyclic(heads: tuple[int, ...]) -> bool:
    n = len(heads)
    for start in range(1, n + 1):
        node, steps = start, 0
        while node != 0:
            node = heads[node - 1]
            steps += 1
            if steps > n:
                return False
    return True


def enumerate_projective_trees(n_words: int) -> list[DepTree]:
    out = []
    for heads in enumerate_trees(n_words):
        if not _nonprojective_arcs(list(heads)):
            out.append(DepTree.from_heads(heads))
    return out


def enumerate_nonprojective_trees(n_words: int) -> list[DepTree]:
    out = []
    for heads in enumerate_trees(n_words):
        if _nonprojective_arcs(list(heads)):
            out.append(DepTree.from_heads(heads))
    return out


__all__ = [
    "DepArc",
    "DepTree",
    "enumerate_nonprojective_trees",
    "enumerate_projective_trees",
    "enumerate_trees",
    "is_projective",
    "lifted_words",
    "projectivize",
]
