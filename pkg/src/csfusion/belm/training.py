"""Training loop: Adam, linear warmup with inverse-sqrt decay, gradient clipping."""

from __future__ import annotations

import math

import torch

from ..errors import EmptyTrainingSet, TooLong
from ..rng import derive_rng
from ..vocab import EOS_ID, SOS_ID
from .model import BelmConfig, BelmModel, smoothed_cross_entropy

_SHUFFLE_STREAM = 0x73


def learning_rate(cfg: BelmConfig, step: int) -> float:
    """lr at optimizer step ``step`` (1-based): linear warmup, then inverse-sqrt."""
    if step < 1:
        raise ValueError("step counts from 1")
    if step <= cfg.warmup_steps:
        return cfg.peak_lr * step / cfg.warmup_steps
    return cfg.peak_lr * math.sqrt(cfg.warmup_steps / step)


def _batch_tensors(pairs, max_len: int):
    """Pad one batch; returns (src, src_mask, tgt_in, tgt_out, loss_mask)."""
    for src_tokens, tgt_tokens in pairs:
        if len(src_tokens) > max_len:
            raise TooLong(len(src_tokens), max_len)
        if len(tgt_tokens) + 1 > max_len:
            raise TooLong(len(tgt_tokens) + 1, max_len)
    bsz = len(pairs)
    s_len = max(len(p[0]) for p in pairs)
    t_len = max(len(p[1]) for p in pairs) + 1  # +1 for the appended eos
    src = torch.zeros(bsz, s_len, dtype=torch.long)
    src_mask = torch.zeros(bsz, s_len, dtype=torch.bool)
    tgt_in = torch.full((bsz, t_len), EOS_ID, dtype=torch.long)
    tgt_out = torch.full((bsz, t_len), EOS_ID, dtype=torch.long)
    loss_mask = torch.zeros(bsz, t_len, dtype=torch.float64)
    for row, (src_tokens, tgt_tokens) in enumerate(pairs):
        src[row, : len(src_tokens)] = torch.tensor(src_tokens, dtype=torch.long)
        src_mask[row, : len(src_tokens)] = True
        tgt_in[row, 0] = SOS_ID
        if tgt_tokens:
            tgt_in[row, 1 : len(tgt_tokens) + 1] = torch.tensor(tgt_tokens, dtype=torch.long)
            tgt_out[row, : len(tgt_tokens)] = torch.tensor(tgt_tokens, dtype=torch.long)
        loss_mask[row, : len(tgt_tokens) + 1] = 1.0
    return src, src_mask, tgt_in, tgt_out, loss_mask


def train(
    model: BelmModel,
    pairs,
    epochs: int,
    batch_size: int,
    max_steps: int | None = None,
) -> list[float]:
    """Optimize on (input, target) pairs; returns per-step training losses.

    Deterministic given the model config seed: batch shuffling uses a
    stream derived from (seed, stream id, starting step) and dropout uses
    the torch RNG seeded the same way.
    """
    if not pairs:
        raise EmptyTrainingSet()
    if epochs < 0 or batch_size < 1:
        raise ValueError("epochs must be >= 0 and batch_size >= 1")
    cfg = model.config
    shuffle_rng = derive_rng(cfg.seed, _SHUFFLE_STREAM, model.step)
    torch.manual_seed(derive_rng(cfg.seed, _SHUFFLE_STREAM + 1, model.step).integers(2**63))
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.peak_lr)
    history: list[float] = []
    model.train()
    try:
        for _ in range(epochs):
            order = shuffle_rng.permutation(len(pairs))
            for start in range(0, len(pairs), batch_size):
                if max_steps is not None and len(history) >= max_steps:
                    return history
                batch = [pairs[int(i)] for i in order[start : start + batch_size]]
                src, src_mask, tgt_in, tgt_out, loss_mask = _batch_tensors(batch, cfg.max_len)
                lr = learning_rate(cfg, model.step + 1)
                for group in optimizer.param_groups:
                    group["lr"] = lr
                optimizer.zero_grad()
                logits = model(src, src_mask, tgt_in)
                batch_loss = smoothed_cross_entropy(logits, tgt_out, loss_mask, cfg.label_smoothing)
                batch_loss.backward()
                torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip)
                optimizer.step()
                model.step += 1
                value = float(batch_loss.detach())
                if not math.isfinite(value):
                    raise FloatingPointError(f"non-finite loss at step {model.step}")
                history.append(value)
    finally:
        model.eval()
    return history
