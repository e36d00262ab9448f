"""Autoregressive beam search over the fusion model.

Hypotheses start at sos and are finalized when eos is emitted or the
output length cap is reached (finalizing without the eos term). Scores
are pure summed log-probabilities unless length normalization is
requested. blank and sos can never be emitted.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

from ..errors import TooLong
from ..vocab import BLANK_ID, EOS_ID, SOS_ID, Utterance
from .model import BelmModel

_BANNED_IDS = (BLANK_ID, SOS_ID)


@dataclass(frozen=True)
class Hypothesis:
    tokens: Utterance
    log_prob: float


def decode_nbest(
    model: BelmModel,
    belm_input: Utterance,
    beam: int,
    n_best: int = 1,
    max_out_len: int | None = None,
    length_normalize: bool = False,
) -> list[Hypothesis]:
    """Top ``n_best`` hypotheses (best first) from beam search of width ``beam``."""
    if beam < 1:
        raise ValueError("beam must be >= 1")
    cfg = model.config
    if len(belm_input) > cfg.max_len:
        raise TooLong(len(belm_input), cfg.max_len)
    cap = cfg.max_len if max_out_len is None else max_out_len
    if not belm_input:
        raise ValueError("belm_input must contain at least the blank separator")
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            src = torch.tensor([belm_input], dtype=torch.long)
            src_mask = torch.ones(1, len(belm_input), dtype=torch.bool)
            memory = model.encode(src, src_mask)

            alive: list[tuple[tuple[int, ...], float]] = [((), 0.0)]
            finished: list[Hypothesis] = []
            for _ in range(cap):
                tgt_in = torch.tensor(
                    [(SOS_ID,) + tokens for tokens, _ in alive], dtype=torch.long
                )
                mem = memory.expand(len(alive), -1, -1)
                mask = src_mask.expand(len(alive), -1)
                logits = model.decode_logits(mem, mask, tgt_in)[:, -1, :]
                logits[:, list(_BANNED_IDS)] = float("-inf")
                log_probs = torch.log_softmax(logits, dim=-1)
                scores = torch.tensor([[s] for _, s in alive], dtype=torch.float64) + log_probs
                flat = scores.view(-1)
                k = min(beam, flat.numel())
                top_scores, top_idx = torch.topk(flat, k)
                vocab_size = log_probs.shape[-1]
                next_alive = []
                for score_t, idx_t in zip(top_scores, top_idx):
                    parent = alive[int(idx_t) // vocab_size][0]
                    token = int(idx_t) % vocab_size
                    score = float(score_t)
                    if token == EOS_ID:
                        finished.append(Hypothesis(parent, score))
                    else:
                        next_alive.append((parent + (token,), score))
                alive = next_alive
                if not alive:
                    break
            finished.extend(Hypothesis(tokens, s) for tokens, s in alive)  # length cap hit
    finally:
        model.train(was_training)

    def rank(h: Hypothesis) -> float:
        return h.log_prob / max(len(h.tokens), 1) if length_normalize else h.log_prob

    finished.sort(key=rank, reverse=True)
    return finished[:n_best]


def decode(
    model: BelmModel,
    belm_input: Utterance,
    beam: int,
    max_out_len: int | None = None,
    length_normalize: bool = False,
) -> Hypothesis:
    """Best hypothesis; beam=1 is exactly greedy decoding."""
    return decode_nbest(
        model, belm_input, beam, n_best=1, max_out_len=max_out_len, length_normalize=length_normalize
    )[0]
