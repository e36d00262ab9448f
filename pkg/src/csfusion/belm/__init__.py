"""Bilingual expert language model: fuse two language-specific predictions."""

from .model import BelmConfig, BelmModel, build_input, forward, loss
from .training import learning_rate, train
from .decoding import Hypothesis, decode, decode_nbest
from .checkpoint import average_checkpoints, load_checkpoint, save_checkpoint

__all__ = [
    "BelmConfig",
    "BelmModel",
    "Hypothesis",
    "average_checkpoints",
    "build_input",
    "decode",
    "decode_nbest",
    "forward",
    "learning_rate",
    "load_checkpoint",
    "loss",
    "save_checkpoint",
    "train",
]
