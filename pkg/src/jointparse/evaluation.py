"""POS accuracy, unlabeled and labeled attachment scores."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .conll import Sentence
from .errors import AlignmentError, DataError

DEFAULT_PUNCT_TAGS = frozenset({"PUNCT", ".", ",", ":", "``", "''", "-LRB-", "-RRB-", "#", "$", "PU"})


@dataclass
class EvalReport:
    pos_correct: int
    head_correct: int
    label_correct: int
    tokens: int
    breakdown: dict[str, "EvalReport"] = field(default_factory=dict)

    @property
    def pos_accuracy(self) -> float:
        return self.pos_correct / self.tokens

    @property
    def uas(self) -> float:
        return self.head_correct / self.tokens

    @property
    def las(self) -> float:
        return self.label_correct / self.tokens

    def line(self) -> str:
        return (f"pos={self.pos_accuracy:.4f} uas={self.uas:.4f} las={self.las:.4f} "
                f"tokens={self.tokens}")

    def table(self) -> str:
        rows = [("metric", "score", "correct", "total"),
                ("POS", f"{100 * self.pos_accuracy:.2f}", str(self.pos_correct), str(self.tokens)),
                ("UAS", f"{100 * self.uas:.2f}", str(self.head_correct), str(self.tokens)),
                ("LAS", f"{100 * self.las:.2f}", str(self.label_correct), str(self.tokens))]
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        out = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                         for i, (c, w) in enumerate(zip(r, widths))) for r in rows]
        for name, sub in self.breakdown.items():
            out.append(f"{name}: {sub.line()}")
        return "\n".join(out)


def score(gold: Sequence[Sentence], pred: Sequence[Sentence], exclude_punct: bool = False,
          punct_tags: Iterable[str] = DEFAULT_PUNCT_TAGS) -> EvalReport:
    """Token-level scores of ``pred`` against ``gold``.

    The root word has no label in the transition system, so it counts as
    labeled-correct whenever it is correctly predicted as root.
    """
    gold, pred = list(gold), list(pred)
    if len(gold) != len(pred):
        raise AlignmentError(f"gold has {len(gold)} sentences, prediction has {len(pred)}")
    punct = frozenset(punct_tags)
    pos = head = label = total = 0
    for k, (g, p) in enumerate(zip(gold, pred), start=1):
        if len(g) != len(p) or g.forms != p.forms:
            raise AlignmentError(f"sentence {k} differs between gold and prediction")
        for gt, pt in zip(g.tokens, p.tokens):
            if exclude_punct and gt.tag in punct:
                continue
            total += 1
            pos += gt.tag == pt.tag
            if gt.head == pt.head:
                head += 1
                label += gt.head == 0 or gt.label == pt.label
    if total == 0:
        raise DataError("no tokens to score")
    return EvalReport(pos, head, label, total)


def combine(reports: dict[str, EvalReport]) -> EvalReport:
    if not reports:
        raise DataError("no reports to combine")
    out = EvalReport(sum(r.pos_correct for r in reports.values()),
                     sum(r.head_correct for r in reports.values()),
                     sum(r.label_correct for r in reports.values()),
                     sum(r.tokens for r in reports.values()))
    out.breakdown = dict(reports)
    return out


def report_format(report: EvalReport) -> tuple[str, str]:
    """Human-readable table and the single ``key=value`` line."""
    return report.table(), report.line()
