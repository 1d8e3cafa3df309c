"""Command-line entry point: ``jointparse {train,parse,oracle,eval,gradcheck}``.

Logs go to stderr; data goes to files or stdout.  Exit codes are 0 on success,
1 for usage errors, 2 for data or model-file errors and 3 when a check fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import Counter
from typing import Optional, Sequence

from .conll import DIALECTS, Sentence, iter_conll, read_conll, write_conll
from .errors import DataError, JointParseError, NonProjectiveError
from .evaluation import DEFAULT_PUNCT_TAGS, report_format, score
from .features import AblationConfig
from .model import Hyperparams, JointModel, greedy_decode, hyper_to_dict, train
from .neural import Tape, check_gradients
from .projectivity import is_projective, lifted_words, projectivize
from .serialization import load_model, save_model
from .synthetic import tiny_model
from .transition import ActionKind, DepTree, derivation_length, oracle_sequence, replay
from .vocab import build_vocab, load_pretrained

logger = logging.getLogger("jointparse")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CHECK = 0, 1, 2, 3
SEED_ENV = "JOINTPARSE_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _switch(value: str) -> bool:
    v = value.lower()
    if v in ("on", "true", "1", "yes"):
        return True
    if v in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on or off, got {value!r}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return Hyperparams.seed
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# flag name, Hyperparams field, help
_HYPER_FLAGS = [
    ("--word-dim", "word_dim", "word embedding size"),
    ("--tag-dim", "tag_dim", "tag embedding size"),
    ("--char-dim", "char_dim", "character embedding size"),
    ("--char-hidden", "char_hidden", "character LSTM size per direction"),
    ("--encoder-hidden", "encoder_hidden", "sentence BiLSTM size per direction"),
    ("--tag-hidden", "tag_hidden", "tag LSTM size"),
    ("--classifier-hidden", "classifier_hidden", "hidden layer size of every classifier"),
    ("--clip-norm", "clip_norm", "global gradient norm limit"),
    ("--l2", "l2_lambda", "L2 penalty added to the gradient"),
    ("--dropout", "dropout", "dropout rate on encoder and tag inputs and hidden layers"),
    ("--beta1", "beta1", "Adam first-moment decay"),
    ("--beta2", "beta2", "Adam second-moment decay"),
    ("--epsilon", "epsilon", "Adam epsilon"),
    ("--unk-replace", "unk_replace", "probability of replacing a singleton word by <unk>"),
    ("--min-word-count", "min_word_count", "words rarer than this map to <unk>"),
]


class _DefaultsFormatter(argparse.ArgumentDefaultsHelpFormatter):
    """Show defaults, except for options that have none."""

    def _get_help_string(self, action):
        if action.default is None or action.default is False or action.required:
            return action.help
        return super()._get_help_string(action)


def build_parser() -> argparse.ArgumentParser:
    fmt = _DefaultsFormatter
    p = _Parser(prog="jointparse", description="Joint POS tagging and dependency parsing.",
                formatter_class=fmt)
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging")
    p.add_argument("-q", "--quiet", action="store_true", help="only log warnings")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    defaults = Hyperparams()

    t = sub.add_parser("train", help="train a model", formatter_class=fmt)
    t.add_argument("--train", required=True, help="training treebank")
    t.add_argument("--dev", help="development treebank for model selection")
    t.add_argument("--model", required=True, help="output model file")
    t.add_argument("--embeddings", help="pretrained word vectors (text format)")
    t.add_argument("--tune-embeddings", action="store_true",
                   help="update pretrained vectors during training")
    t.add_argument("--epochs", type=int, default=defaults.epochs, help="training epochs")
    t.add_argument("--lr", type=float, default=defaults.learning_rate, help="Adam learning rate")
    t.add_argument("--seed", type=int, default=None,
                   help=f"random seed (default: ${SEED_ENV} if set, else {defaults.seed})")
    t.add_argument("--tag-to-parse", type=_switch, default=True, metavar="on|off",
                   help="feed tag vectors to the structural and label classifiers")
    t.add_argument("--parse-to-tag", type=_switch, default=True, metavar="on|off",
                   help="feed the second stack item to the tag classifier")
    t.add_argument("--dialect", choices=DIALECTS, default="conllu", help="treebank dialect")
    t.add_argument("--no-l2-embeddings", action="store_true",
                   help="exclude embedding tables from the L2 penalty")
    for flag, name, text in _HYPER_FLAGS:
        value = getattr(defaults, name)
        t.add_argument(flag, dest=name, type=type(value), default=value, help=text)
    t.set_defaults(func=cmd_train)

    pa = sub.add_parser("parse", help="tag and parse a file", formatter_class=fmt)
    pa.add_argument("--model", required=True, help="model file")
    pa.add_argument("--input", required=True, help="input file ('-' for stdin)")
    pa.add_argument("--output", default="-", help="output file ('-' for stdout)")
    pa.add_argument("--dialect", choices=DIALECTS, default="conllu", help="file dialect")
    pa.set_defaults(func=cmd_parse)

    o = sub.add_parser("oracle", help="print gold derivations", formatter_class=fmt)
    o.add_argument("--input", required=True, help="gold treebank")
    o.add_argument("--projectivize", action="store_true",
                   help="lift non-projective arcs before deriving")
    o.add_argument("--dialect", choices=DIALECTS, default="conllu", help="treebank dialect")
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("eval", help="score predictions against gold", formatter_class=fmt)
    e.add_argument("--gold", required=True, help="gold treebank")
    e.add_argument("--pred", required=True, help="predicted treebank")
    e.add_argument("--exclude-punct", action="store_true",
                   help="skip tokens whose gold tag is punctuation")
    e.add_argument("--punct-tags", default=",".join(sorted(DEFAULT_PUNCT_TAGS)),
                   help="comma-separated punctuation tags")
    e.add_argument("--dialect", choices=DIALECTS, default="conllu", help="treebank dialect")
    e.set_defaults(func=cmd_eval)

    g = sub.add_parser("gradcheck", help="finite-difference check of the full model",
                       formatter_class=fmt)
    g.add_argument("--seed", type=int, default=None,
                   help=f"random seed (default: ${SEED_ENV} if set, else {defaults.seed})")
    g.add_argument("--tolerance", type=float, default=1e-4, help="max relative error")
    g.add_argument("--step", type=float, default=1e-5, help="central-difference step")
    g.set_defaults(func=cmd_gradcheck)
    return p


def _log_config(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in vars(args).items() if k != "func"}
    logger.info("config %s", json.dumps(resolved, sort_keys=True, default=str))


def _projectivize_corpus(sentences: Sequence[Sentence]) -> tuple[list[Sentence], int, int]:
    out, n_nonproj, n_lifted = [], 0, 0
    for s in sentences:
        tree = s.tree()
        if is_projective(tree):
            out.append(s)
            continue
        fixed = projectivize(tree)
        n_nonproj += 1
        n_lifted += len(lifted_words(tree, fixed))
        root_label = next((t.label for t in s.tokens if t.head == 0), None)
        out.append(s.with_tree(fixed, root_label))
    return out, n_nonproj, n_lifted


def cmd_train(args: argparse.Namespace) -> int:
    if args.seed is None:
        args.seed = _default_seed()
    _log_config(args)
    corpus = read_conll(args.train, args.dialect)
    if not len(corpus):
        raise DataError(f"{args.train}: no sentences")
    sentences, n_nonproj, n_lifted = _projectivize_corpus(corpus.sentences)
    logger.info("projectivized %d of %d training sentences (%d arcs lifted)",
                n_nonproj, len(sentences), n_lifted)
    dev = read_conll(args.dev, args.dialect).sentences if args.dev else None

    overrides = {name: getattr(args, name) for _, name, _ in _HYPER_FLAGS}
    try:
        hyper = Hyperparams(epochs=args.epochs, learning_rate=args.lr, seed=args.seed,
                            tune_pretrained=args.tune_embeddings,
                            l2_embeddings=not args.no_l2_embeddings, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    vocab = build_vocab(sentences, hyper.min_word_count)
    pretrained = load_pretrained(args.embeddings, vocab) if args.embeddings else None
    ablation = AblationConfig(tag_to_parse=args.tag_to_parse, parse_to_tag=args.parse_to_tag)
    logger.info("hyperparameters %s", json.dumps(hyper_to_dict(hyper), sort_keys=True))
    logger.info("vocabulary: %d words, %d chars, %d tags, %d labels", len(vocab.words),
                len(vocab.chars), vocab.n_tags, vocab.n_labels)

    model = JointModel(vocab, hyper, ablation, pretrained)

    def report(stats):
        line = f"epoch={stats.epoch} loss={stats.loss:.4f}"
        if stats.dev is not None:
            line += " " + stats.dev.line()
        print(line, flush=True)

    result = train(model, sentences, dev, on_epoch=report)
    save_model(result.model, args.model)
    logger.info("wrote %s (best epoch %d)", args.model, result.best_epoch)
    return EXIT_OK


def _open_out(path: str):
    if path == "-":
        return sys.stdout, False
    directory = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(directory):
        raise DataError(f"{path}: output directory does not exist")
    return open(path, "w", encoding="utf-8", newline="\n"), True


def cmd_parse(args: argparse.Namespace) -> int:
    _log_config(args)
    model = load_model(args.model)
    source = sys.stdin if args.input == "-" else args.input
    if source is not sys.stdin and not os.path.exists(source):
        raise FileNotFoundError(2, "No such file or directory", source)
    stream, close = _open_out(args.output)
    n_sent = n_tok = 0
    try:
        for s in iter_conll(source, args.dialect):
            pred = greedy_decode(model, s.forms).to_sentence(s, model.vocab)
            write_conll([pred], stream, args.dialect)
            n_sent += 1
            n_tok += len(s)
    finally:
        if close:
            stream.close()
        else:
            stream.flush()
    logger.info("parsed %d sentences, %d tokens", n_sent, n_tok)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace) -> int:
    _log_config(args)
    corpus = read_conll(args.input, args.dialect)
    vocab = build_vocab(corpus)
    counts: Counter = Counter()
    tokens = lifted = derived = 0
    failures = []
    for k, s in enumerate(corpus, start=1):
        try:
            if any(t is None for t in s.tags):
                raise DataError("missing gold tags")
            tree = s.tree()
            if args.projectivize and not is_projective(tree):
                fixed = projectivize(tree)
                lifted += len(lifted_words(tree, fixed))
                tree = fixed
            tags = [vocab.tag_id(t) for t in s.tags]
            labels = [None if h == 0 else (None if l is None else vocab.label_id(l))
                      for h, l in zip(tree.heads, tree.labels)]
            tree = DepTree.from_heads(tree.heads, labels)
            actions = oracle_sequence(tags, tree)
            if replay(actions, len(s)) != (tuple(tags), tree.canonical()):
                raise JointParseError("replay does not reproduce the gold annotation")
            if len(actions) != derivation_length(len(s)):
                raise JointParseError(f"{len(actions)} actions, expected {derivation_length(len(s))}")
        except NonProjectiveError:
            failures.append((k, "non-projective tree (use --projectivize)"))
            continue
        except JointParseError as exc:
            failures.append((k, str(exc)))
            continue
        print(" ".join(a.name(vocab.tags, vocab.labels) for a in actions))
        counts.update(a.kind for a in actions)
        tokens += len(s)
        derived += 1
    for k, message in failures:
        logger.error("sentence %d: %s", k, message)
    check = "ok" if derived else "n/a"
    print(f"sentences={derived} tokens={tokens} actions={sum(counts.values())} "
          f"shift={counts[ActionKind.SHIFT]} left={counts[ActionKind.LEFT]} "
          f"right={counts[ActionKind.RIGHT]} tag={counts[ActionKind.TAG]} "
          f"label={counts[ActionKind.LABEL]} length_check={check} lifted={lifted} "
          f"failed={len(failures)}")
    return EXIT_DATA if failures else EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    _log_config(args)
    gold = read_conll(args.gold, args.dialect)
    pred = read_conll(args.pred, args.dialect)
    punct = frozenset(t for t in args.punct_tags.split(",") if t)
    report = score(gold.sentences, pred.sentences, args.exclude_punct, punct)
    table, line = report_format(report)
    print(table)
    print(line)
    return EXIT_OK


def cmd_gradcheck(args: argparse.Namespace) -> int:
    if args.seed is None:
        args.seed = _default_seed()
    _log_config(args)
    model, sentence = tiny_model(args.seed)

    def forward():
        tape = Tape()
        return tape, model.loss(tape, sentence)

    rep = check_gradients(forward, model.trainable_parameters(), args.tolerance, args.step)
    status = "pass" if rep.passed else "FAIL"
    print(f"gradcheck {status}: worst relative error {rep.worst_error:.3e} at "
          f"{rep.worst_parameter}{list(rep.worst_index)} over {rep.n_checked} entries "
          f"(tolerance {args.tolerance:g})")
    return EXIT_OK if rep.passed else EXIT_CHECK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING if args.quiet else (logging.DEBUG if args.verbose else logging.INFO)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"jointparse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (JointParseError, OSError, UnicodeDecodeError) as exc:
        print(f"jointparse: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
