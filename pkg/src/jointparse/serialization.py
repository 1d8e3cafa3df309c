"""Versioned binary model container.

Layout::

    magic     8 bytes   b"JNTPARSE"
    version   1 byte
    length    4 bytes   little-endian uint32, size of the JSON header
    header    JSON      vocabularies, hyperparameters, ablation, parameter manifest
    payload   float32   little-endian arrays in manifest order
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .errors import CorruptModelError, ModelVersionError
from .features import AblationConfig
from .model import Hyperparams, JointModel, hyper_to_dict
from .vocab import PretrainedEmbeddings, Vocab

MAGIC = b"JNTPARSE"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<8sBI")


def model_bytes(model: JointModel) -> bytes:
    params = model.parameters()
    header = {
        "vocab": model.vocab.to_dict(),
        "hyper": hyper_to_dict(model.hyper),
        "ablation": {"tag_to_parse": model.ablation.tag_to_parse,
                     "parse_to_tag": model.ablation.parse_to_tag},
        "pretrained_words": model.pretrained_words,
        "parameters": [{"name": p.name, "shape": list(p.shape)} for p in params],
    }
    blob = json.dumps(header, sort_keys=True, ensure_ascii=True).encode("ascii")
    chunks = [_PREFIX.pack(MAGIC, FORMAT_VERSION, len(blob)), blob]
    chunks += [np.ascontiguousarray(p.value, dtype="<f4").tobytes() for p in params]
    return b"".join(chunks)


def save_model(model: JointModel, path: str | os.PathLike) -> None:
    """Write atomically: a partially written file never appears at ``path``."""
    data = model_bytes(model)
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def model_from_bytes(data: bytes) -> JointModel:
    if len(data) < _PREFIX.size:
        raise CorruptModelError("model file is truncated")
    magic, version, length = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise CorruptModelError("not a jointparse model file")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"model format version {version} is not supported "
                                f"(expected {FORMAT_VERSION})")
    start = _PREFIX.size
    if len(data) < start + length:
        raise CorruptModelError("model file is truncated")
    try:
        header = json.loads(data[start:start + length].decode("ascii"))
        manifest = header["parameters"]
        vocab = Vocab.from_dict(header["vocab"])
        hyper = Hyperparams.from_dict(header["hyper"])
        ablation = AblationConfig(**header["ablation"])
        pre_words = header.get("pretrained_words") or []
    except (ValueError, KeyError, TypeError) as exc:
        raise CorruptModelError(f"unreadable model header: {exc}") from None

    offset = start + length
    arrays = {}
    for entry in manifest:
        shape = tuple(entry["shape"])
        nbytes = 4 * int(np.prod(shape, dtype=np.int64))
        if offset + nbytes > len(data):
            raise CorruptModelError("model file is truncated")
        arrays[entry["name"]] = np.frombuffer(data, "<f4", int(nbytes // 4), offset).reshape(shape)
        offset += nbytes
    if offset != len(data):
        raise CorruptModelError("trailing bytes after the last parameter")

    pretrained = None
    if pre_words:
        vec = arrays.get("embed.pretrained")
        if vec is None:
            raise CorruptModelError("pretrained words listed but no pretrained table stored")
        pretrained = PretrainedEmbeddings(list(pre_words), vec.astype(np.float64))
    model = JointModel(vocab, hyper, ablation, pretrained, init="zero")
    named = model.named_parameters()
    if set(named) != set(arrays):
        raise CorruptModelError("parameter manifest does not match the model layout")
    for name, p in named.items():
        if p.shape != arrays[name].shape:
            raise CorruptModelError(f"parameter {name} has shape {arrays[name].shape}, "
                                    f"expected {p.shape}")
        p.value[...] = arrays[name]
    return model


def load_model(path: str | os.PathLike) -> JointModel:
    with open(path, "rb") as fh:
        return model_from_bytes(fh.read())
