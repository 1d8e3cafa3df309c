import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jointparse.errors import AlignmentError, DataError
from jointparse.evaluation import EvalReport, combine, report_format, score
from jointparse.synthetic import example_sentence, make_sentence


def test_identical_is_perfect():
    s = example_sentence()
    report = score([s], [s])
    assert report.line() == "pos=1.0000 uas=1.0000 las=1.0000 tokens=4"


def test_one_wrong_label():
    s = example_sentence()
    pred = s.with_annotation(s.tags, s.heads, ["nsubj", "root", "amod", "dobj"])
    report = score([s], [pred])
    assert (report.pos_accuracy, report.uas, report.las) == (1.0, 1.0, 0.75)


def test_root_needs_no_label_but_the_right_head():
    s = example_sentence()
    relabeled_root = s.with_annotation(s.tags, s.heads, ["nsubj", "ROOT", "det", "dobj"])
    assert score([s], [relabeled_root]).las == 1.0
    wrong_root = s.with_annotation(s.tags, [2, 4, 0, 2], ["nsubj", "x", "root", "dobj"])
    r = score([s], [wrong_root])
    assert r.uas == 0.5 and r.las == 0.5


def test_head_wrong_means_label_wrong():
    s = example_sentence()
    pred = s.with_annotation(["PRP", "VBD", "NN", "NN"], [2, 0, 2, 2], s.labels)
    r = score([s], [pred])
    assert (r.pos_correct, r.head_correct, r.label_correct) == (3, 3, 3)


def test_punctuation_exclusion():
    g = make_sentence(["a", "."], ["N", "PUNCT"], [0, 1], [None, "punct"])
    p = g.with_annotation(["N", "N"], [0, 1], ["root", "x"])
    assert score([g], [p]).tokens == 2
    r = score([g], [p], exclude_punct=True)
    assert r.tokens == 1 and r.line() == "pos=1.0000 uas=1.0000 las=1.0000 tokens=1"
    with pytest.raises(DataError):
        score([make_sentence(["."], ["PUNCT"], [0], [None])] * 1,
              [make_sentence(["."], ["PUNCT"], [0], [None])], exclude_punct=True)


def test_misalignment():
    s = example_sentence()
    with pytest.raises(AlignmentError):
        score([s], [])
    other = make_sentence(["He", "lost"], ["PRP", "VBD"], [2, 0], ["nsubj", None])
    with pytest.raises(AlignmentError):
        score([s], [other])


def test_table_and_combine():
    a = EvalReport(9, 8, 7, 10)
    b = EvalReport(10, 10, 10, 10)
    total = combine({"a": a, "b": b})
    assert total.tokens == 20 and total.las == 17 / 20
    table, line = report_format(total)
    assert "LAS" in table and "85.00" in table and "a: pos=0.9000" in table
    assert line == "pos=0.9500 uas=0.9000 las=0.8500 tokens=20"


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.booleans(), st.booleans()), min_size=2, max_size=12))
def test_metric_ordering(flags):
    n = len(flags)
    forms = [f"w{i}" for i in range(n)]
    heads = [0] + [1] * (n - 1)
    gold = make_sentence(forms, ["T"] * n, heads, [None] + ["l"] * (n - 1))
    ptags = ["T" if f[0] else "U" for f in flags]
    pheads = [heads[i] if flags[i][1] else (2 if heads[i] != 2 else 1) for i in range(n)]
    plabels = ["l" if f[2] else "m" for f in flags]
    pred = gold.with_annotation(ptags, pheads, plabels)
    r = score([gold], [pred])
    assert 0.0 <= r.las <= r.uas <= 1.0
    assert r.pos_correct == sum(f[0] for f in flags)
