# Compare the four interaction settings between tagging and parsing.
from jointparse.evaluation import score
from jointparse.features import AblationConfig, input_dim
from jointparse.model import Hyperparams, JointModel, decode_corpus, train
from jointparse.synthetic import toy_corpus
from jointparse.transition import ClassifierKind
from jointparse.vocab import build_vocab

# %%
# input width of each classifier at the default sizes (x=400, t=100)
for t2p in (True, False):
    for p2t in (True, False):
        ab = AblationConfig(tag_to_parse=t2p, parse_to_tag=p2t)
        dims = {k.name.lower(): input_dim(k, ab, 400, 100) for k in ClassifierKind}
        print(f"tag->parse={t2p!s:5s} parse->tag={p2t!s:5s}", dims)

# %%
corpus = toy_corpus(40, seed=3)
held_out = toy_corpus(20, seed=4)
vocab = build_vocab(corpus)
hyper = Hyperparams(word_dim=16, tag_dim=8, char_dim=8, char_hidden=8, encoder_hidden=16,
                    tag_hidden=8, classifier_hidden=32, epochs=8)

# %%
for t2p in (True, False):
    for p2t in (True, False):
        ab = AblationConfig(tag_to_parse=t2p, parse_to_tag=p2t)
        result = train(JointModel(vocab, hyper, ab), corpus, held_out)
        report = score(held_out, decode_corpus(result.model, held_out))
        print(f"tag->parse={t2p!s:5s} parse->tag={p2t!s:5s} {report.line()}")
