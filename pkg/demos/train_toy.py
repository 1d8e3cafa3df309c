# Train the joint tagger-parser on a small synthetic grammar and score it.
import time

from jointparse.conll import format_conll
from jointparse.evaluation import score
from jointparse.model import Hyperparams, JointModel, decode_corpus, train
from jointparse.synthetic import toy_corpus
from jointparse.vocab import build_vocab

# %%
corpus = toy_corpus(50, seed=0)
held_out = toy_corpus(20, seed=1)
vocab = build_vocab(corpus)
print(len(corpus), "sentences,", sum(len(s) for s in corpus), "tokens")
print("tags", vocab.tags, "labels", vocab.labels)

# %%
# small dimensions so this finishes in well under a minute on one core
hyper = Hyperparams(word_dim=32, tag_dim=16, char_dim=16, char_hidden=16, encoder_hidden=32,
                    tag_hidden=16, classifier_hidden=64, epochs=15)
model = JointModel(vocab, hyper)
start = time.perf_counter()
result = train(model, corpus, held_out,
               on_epoch=lambda e: print(f"epoch {e.epoch:2d} loss {e.loss:8.2f} {e.dev.line()}"))
print(f"best epoch {result.best_epoch}, {time.perf_counter() - start:.0f}s")

# %%
pred = decode_corpus(result.model, held_out)
print(score(held_out, pred).table())

# %%
print(format_conll(pred[:2]))
