"""Joint part-of-speech tagging and dependency parsing with a transition system."""

from .conll import Corpus, Sentence, Token, format_conll, iter_conll, read_conll, write_conll
from .errors import (
    ConllFormatError,
    CorruptModelError,
    DataError,
    JointParseError,
    ModelFormatError,
    ModelVersionError,
    NonProjectiveError,
    TransitionError,
)
from .evaluation import EvalReport, score
from .features import AblationConfig
from .model import (
    DecodeResult,
    Hyperparams,
    JointModel,
    decode_corpus,
    greedy_decode,
    sentence_nll,
    train,
)
from .projectivity import is_projective, projectivize
from .serialization import load_model, save_model
from .transition import (
    LEFT,
    RIGHT,
    SHIFT,
    Action,
    ActionKind,
    Configuration,
    DepArc,
    DepTree,
    Label,
    Tag,
    apply_action,
    is_legal,
    is_terminal,
    legal_actions,
    oracle_sequence,
    replay,
)
from .vocab import Vocab, build_vocab, load_pretrained

__version__ = "0.1.0"
