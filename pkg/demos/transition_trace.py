# Walk one sentence through the joint transition system by hand.
import numpy as np

from jointparse.projectivity import enumerate_projective_trees, is_projective, projectivize
from jointparse.synthetic import example_sentence
from jointparse.transition import Configuration, DepTree, apply_action, classifier_kind, oracle_sequence
from jointparse.vocab import build_vocab

# %%
s = example_sentence()
vocab = build_vocab([s])
tags = [vocab.tag_id(t) for t in s.tags]
gold = s.tree()
tree = DepTree.from_heads(gold.heads, [None if l is None else vocab.label_id(l)
                                       for l in gold.labels])
actions = oracle_sequence(tags, tree)
print(len(actions), "actions for", len(s), "words")  # always 4N-2

# %%
# stack, buffer and the classifier that picks the next action
c = Configuration.initial(len(s))
for a in actions:
    kind = classifier_kind(c).name.lower()
    c = apply_action(c, a)
    print(f"{kind:10s} {a.name(vocab.tags, vocab.labels):12s} S={list(c.stack)} B={list(c.buffer)}")

# %%
# arcs come out as (head, modifier, label)
for arc in sorted(c.arcs, key=lambda a: a.modifier):
    print(s.forms[arc.head - 1], "->", s.forms[arc.modifier - 1], vocab.labels[arc.label])

# %%
# projective trees per length
print([len(enumerate_projective_trees(n)) for n in range(1, 7)])

# %%
# a crossing tree gets its shortest offending arc lifted
crossing = DepTree.from_heads([3, 4, 0, 3])
fixed = projectivize(crossing)
print(crossing.heads, is_projective(crossing), "->", fixed.heads, is_projective(fixed))
print(np.array(fixed.heads) - np.array(crossing.heads))
