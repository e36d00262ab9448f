"""Versioned binary checkpoint container.

Layout: magic ``BELM`` | u32 format version | u32 header length |
canonical-JSON header (config, vocab size, step, parameter manifest) |
raw little-endian float64 tensors in manifest order.
"""

from __future__ import annotations

import json
import struct

import numpy as np
import torch

from ..errors import ShapeMismatch, VersionMismatch
from .model import BelmConfig, BelmModel

MAGIC = b"BELM"
FORMAT_VERSION = 1


def _header(model: BelmModel) -> dict:
    return {
        "config": model.config.to_json_dict(),
        "vocab_size": model.vocab_size,
        "step": model.step,
        "params": [[name, list(p.shape)] for name, p in model.named_parameters()],
    }


def save_checkpoint(model: BelmModel, path) -> None:
    header = json.dumps(_header(model), sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<II", FORMAT_VERSION, len(header)))
        f.write(header)
        for _, p in model.named_parameters():
            f.write(p.detach().numpy().astype("<f8", copy=False).tobytes())


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise VersionMismatch(f"truncated file while reading {what}")
    return data


def load_checkpoint(
    path,
    expect_config: BelmConfig | None = None,
    expect_vocab_size: int | None = None,
) -> BelmModel:
    """Rebuild a model from ``path``; decode output is bit-identical to save time."""
    with open(path, "rb") as f:
        if _read_exact(f, 4, "magic") != MAGIC:
            raise VersionMismatch("not a BELM checkpoint (bad magic)")
        version, header_len = struct.unpack("<II", _read_exact(f, 8, "version"))
        if version != FORMAT_VERSION:
            raise VersionMismatch(f"unsupported format version {version}")
        try:
            header = json.loads(_read_exact(f, header_len, "header").decode("utf-8"))
            config = BelmConfig.from_json_dict(header["config"])
            vocab_size = int(header["vocab_size"])
            step = int(header["step"])
            manifest = [(name, tuple(int(d) for d in shape)) for name, shape in header["params"]]
        except (ValueError, KeyError, TypeError, UnicodeDecodeError) as exc:
            raise VersionMismatch(f"malformed header: {exc}") from exc

        if expect_config is not None and config != expect_config:
            raise ShapeMismatch("checkpoint was written with a different model config")
        if expect_vocab_size is not None and vocab_size != expect_vocab_size:
            raise ShapeMismatch(
                f"checkpoint vocab size {vocab_size} != expected {expect_vocab_size}"
            )

        model = BelmModel(config, vocab_size)
        model.step = step
        params = dict(model.named_parameters())
        if [name for name, _ in manifest] != list(params):
            raise ShapeMismatch("parameter manifest does not match the model")
        with torch.no_grad():
            for name, shape in manifest:
                p = params[name]
                if tuple(p.shape) != shape:
                    raise ShapeMismatch(f"parameter {name} has shape {tuple(p.shape)}, file says {shape}")
                n_bytes = int(np.prod(shape, dtype=np.int64)) * 8 if shape else 8
                raw = np.frombuffer(_read_exact(f, n_bytes, name), dtype="<f8").reshape(shape)
                p.copy_(torch.from_numpy(raw.copy()))
        if f.read(1):
            raise VersionMismatch("trailing bytes after parameter data")
    return model


def average_checkpoints(paths) -> BelmModel:
    """Parameter-wise mean of several checkpoints of the same config."""
    paths = list(paths)
    if not paths:
        raise ValueError("need at least one checkpoint")
    model = load_checkpoint(paths[0])
    others = [load_checkpoint(p, expect_config=model.config, expect_vocab_size=model.vocab_size) for p in paths[1:]]
    with torch.no_grad():
        for name, p in model.named_parameters():
            stack = torch.stack([p.detach()] + [dict(m.named_parameters())[name].detach() for m in others])
            p.copy_(stack.mean(dim=0))
    return model
