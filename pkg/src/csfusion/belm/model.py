"""Pre-norm transformer encoder-decoder over the shared bilingual vocab.

The input is the two language-specific predictions joined by a single
blank token; the decoder is trained teacher-forced and emits the fused
transcript autoregressively. Everything runs in float64 on CPU so that
training, decoding and checkpoints are bit-reproducible for a fixed seed
and thread count.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import torch
import torch.nn as nn

from ..errors import ParseError, PurityViolation, TooLong
from ..vocab import BLANK_ID, EOS_ID, SOS_ID, UNK_ID, LanguageTag, Utterance, VocabSpec


@dataclass(frozen=True)
class BelmConfig:
    enc_layers: int = 2
    dec_layers: int = 1
    d_model: int = 64
    heads: int = 2
    d_ff: int = 128
    dropout: float = 0.1
    label_smoothing: float = 0.1
    max_len: int = 256
    warmup_steps: int = 200
    peak_lr: float = 1e-3
    grad_clip: float = 5.0
    seed: int = 0

    def __post_init__(self):
        for name in ("enc_layers", "dec_layers", "d_model", "heads", "d_ff", "max_len", "warmup_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.d_model % self.heads != 0:
            raise ValueError("d_model must be divisible by heads")
        for name in ("dropout", "label_smoothing"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.peak_lr <= 0 or self.grad_clip <= 0:
            raise ValueError("peak_lr and grad_clip must be positive")

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, data: dict) -> "BelmConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown model-config keys: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("enc_layers", "dec_layers", "d_model", "heads", "d_ff", "max_len", "warmup_steps", "seed"):
            if key in kwargs:
                kwargs[key] = int(kwargs[key])
        for key in ("dropout", "label_smoothing", "peak_lr", "grad_clip"):
            if key in kwargs:
                kwargs[key] = float(kwargs[key])
        return cls(**kwargs)


def build_input(pred_m: Utterance, pred_e: Utterance, vocab: VocabSpec, max_len: int | None = None) -> Utterance:
    """[pred_m] ++ [blank] ++ [pred_e]; each segment must be pure own-language/unk."""
    for t in pred_m:
        if t != UNK_ID and vocab.classify(t) is not LanguageTag.MANDARIN:
            raise PurityViolation(t, "Mandarin")
    for t in pred_e:
        if t != UNK_ID and vocab.classify(t) is not LanguageTag.ENGLISH:
            raise PurityViolation(t, "English")
    joined = tuple(pred_m) + (BLANK_ID,) + tuple(pred_e)
    if max_len is not None and len(joined) > max_len:
        raise TooLong(len(joined), max_len)
    return joined


def sinusoidal_encoding(max_len: int, d_model: int) -> torch.Tensor:
    """(max_len, d_model) sin/cos table."""
    position = torch.arange(max_len, dtype=torch.float64).unsqueeze(1)
    div = torch.exp(torch.arange(0, d_model, 2, dtype=torch.float64) * (-math.log(10000.0) / d_model))
    table = torch.zeros(max_len, d_model, dtype=torch.float64)
    table[:, 0::2] = torch.sin(position * div)
    table[:, 1::2] = torch.cos(position * div)
    return table


class MultiHeadAttention(nn.Module):
    def __init__(self, d_model: int, heads: int, dropout: float):
        super().__init__()
        self.heads = heads
        self.d_head = d_model // heads
        self.wq = nn.Linear(d_model, d_model)
        self.wk = nn.Linear(d_model, d_model)
        self.wv = nn.Linear(d_model, d_model)
        self.wo = nn.Linear(d_model, d_model)
        self.drop = nn.Dropout(dropout)

    def forward(self, query, key, value, mask=None):
        # query: (B, Tq, D); key/value: (B, Tk, D); mask broadcasts to (B, H, Tq, Tk), True = attend
        bsz, t_q, _ = query.shape
        t_k = key.shape[1]
        q = self.wq(query).view(bsz, t_q, self.heads, self.d_head).transpose(1, 2)
        k = self.wk(key).view(bsz, t_k, self.heads, self.d_head).transpose(1, 2)
        v = self.wv(value).view(bsz, t_k, self.heads, self.d_head).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.d_head)
        if mask is not None:
            scores = scores.masked_fill(~mask, float("-inf"))
        attn = self.drop(torch.softmax(scores, dim=-1))
        out = (attn @ v).transpose(1, 2).reshape(bsz, t_q, -1)
        return self.wo(out)


class FeedForward(nn.Module):
    def __init__(self, d_model: int, d_ff: int, dropout: float):
        super().__init__()
        self.lin1 = nn.Linear(d_model, d_ff)
        self.lin2 = nn.Linear(d_ff, d_model)
        self.drop = nn.Dropout(dropout)

    def forward(self, x):
        return self.lin2(self.drop(torch.relu(self.lin1(x))))


class EncoderLayer(nn.Module):
    def __init__(self, cfg: BelmConfig):
        super().__init__()
        self.norm1 = nn.LayerNorm(cfg.d_model)
        self.attn = MultiHeadAttention(cfg.d_model, cfg.heads, cfg.dropout)
        self.norm2 = nn.LayerNorm(cfg.d_model)
        self.ffn = FeedForward(cfg.d_model, cfg.d_ff, cfg.dropout)
        self.drop = nn.Dropout(cfg.dropout)

    def forward(self, x, src_mask):
        h = self.norm1(x)
        x = x + self.drop(self.attn(h, h, h, src_mask))
        x = x + self.drop(self.ffn(self.norm2(x)))
        return x


class DecoderLayer(nn.Module):
    def __init__(self, cfg: BelmConfig):
        super().__init__()
        self.norm1 = nn.LayerNorm(cfg.d_model)
        self.self_attn = MultiHeadAttention(cfg.d_model, cfg.heads, cfg.dropout)
        self.norm2 = nn.LayerNorm(cfg.d_model)
        self.cross_attn = MultiHeadAttention(cfg.d_model, cfg.heads, cfg.dropout)
        self.norm3 = nn.LayerNorm(cfg.d_model)
        self.ffn = FeedForward(cfg.d_model, cfg.d_ff, cfg.dropout)
        self.drop = nn.Dropout(cfg.dropout)

    def forward(self, x, memory, causal_mask, memory_mask):
        h = self.norm1(x)
        x = x + self.drop(self.self_attn(h, h, h, causal_mask))
        h = self.norm2(x)
        x = x + self.drop(self.cross_attn(h, memory, memory, memory_mask))
        x = x + self.drop(self.ffn(self.norm3(x)))
        return x


class BelmModel(nn.Module):
    """Fusion model; construction is deterministic given (config, vocab_size)."""

    def __init__(self, config: BelmConfig, vocab_size: int):
        super().__init__()
        if vocab_size < 5:
            raise ValueError("vocab must contain at least one regular token")
        torch.manual_seed(config.seed)
        self.config = config
        self.vocab_size = vocab_size
        self.step = 0
        self.embed = nn.Embedding(vocab_size, config.d_model)
        self.enc_layers = nn.ModuleList(EncoderLayer(config) for _ in range(config.enc_layers))
        self.enc_norm = nn.LayerNorm(config.d_model)
        self.dec_layers = nn.ModuleList(DecoderLayer(config) for _ in range(config.dec_layers))
        self.dec_norm = nn.LayerNorm(config.d_model)
        self.out_proj = nn.Linear(config.d_model, vocab_size)
        self.drop = nn.Dropout(config.dropout)
        nn.init.normal_(self.embed.weight, mean=0.0, std=config.d_model ** -0.5)
        self.double()
        self.register_buffer("pos_table", sinusoidal_encoding(config.max_len, config.d_model))
        self.eval()

    def _embed(self, tokens: torch.Tensor) -> torch.Tensor:
        x = self.embed(tokens) * math.sqrt(self.config.d_model)
        x = x + self.pos_table[: tokens.shape[1]]
        return self.drop(x)

    def encode(self, src: torch.Tensor, src_key_mask: torch.Tensor) -> torch.Tensor:
        # src: (B, S) ids; src_key_mask: (B, S) bool, True = real token
        mask = src_key_mask[:, None, None, :]
        x = self._embed(src)
        for layer in self.enc_layers:
            x = layer(x, mask)
        return self.enc_norm(x)

    def decode_logits(
        self,
        memory: torch.Tensor,
        src_key_mask: torch.Tensor,
        tgt_in: torch.Tensor,
    ) -> torch.Tensor:
        # tgt_in: (B, T) sos-prefixed ids; returns (B, T, V)
        t_len = tgt_in.shape[1]
        causal = torch.tril(torch.ones(t_len, t_len, dtype=torch.bool))[None, None]
        memory_mask = src_key_mask[:, None, None, :]
        x = self._embed(tgt_in)
        for layer in self.dec_layers:
            x = layer(x, memory, causal, memory_mask)
        return self.out_proj(self.dec_norm(x))

    def forward(self, src, src_key_mask, tgt_in):
        return self.decode_logits(self.encode(src, src_key_mask), src_key_mask, tgt_in)


def _check_len(seq, max_len: int) -> None:
    if len(seq) > max_len:
        raise TooLong(len(seq), max_len)


def forward(model: BelmModel, belm_input: Utterance, target_prefix: Utterance) -> torch.Tensor:
    """Teacher-forced logits, one row per target-prefix position (eval mode)."""
    _check_len(belm_input, model.config.max_len)
    _check_len(target_prefix, model.config.max_len)
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            src = torch.tensor([belm_input], dtype=torch.long)
            mask = torch.ones(1, len(belm_input), dtype=torch.bool)
            tgt = torch.tensor([target_prefix], dtype=torch.long)
            logits = model(src, mask, tgt)[0]
    finally:
        model.train(was_training)
    return logits


def smoothed_cross_entropy(logits: torch.Tensor, targets: torch.Tensor, mask: torch.Tensor, smoothing: float) -> torch.Tensor:
    """Mean label-smoothed CE over unmasked positions.

    The gold class gets 1-smoothing, the remaining mass spreads uniformly
    over the other vocab_size-1 classes; smoothing 0 is plain CE.
    """
    log_probs = torch.log_softmax(logits, dim=-1)
    vocab_size = logits.shape[-1]
    nll = -log_probs.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
    if smoothing > 0.0:
        smooth = -log_probs.sum(dim=-1)
        eps = smoothing / (vocab_size - 1)
        per_pos = (1.0 - smoothing - eps) * nll + eps * smooth
    else:
        per_pos = nll
    per_pos = per_pos * mask
    return per_pos.sum() / mask.sum()


def loss(model: BelmModel, belm_input: Utterance, target: Utterance) -> torch.Tensor:
    """Label-smoothed teacher-forcing loss on one pair; eos appended internally."""
    _check_len(belm_input, model.config.max_len)
    _check_len(target, model.config.max_len - 1)  # room for the appended eos
    was_training = model.training
    model.eval()
    try:
        src = torch.tensor([belm_input], dtype=torch.long)
        src_mask = torch.ones(1, len(belm_input), dtype=torch.bool)
        tgt_in = torch.tensor([(SOS_ID,) + tuple(target)], dtype=torch.long)
        tgt_out = torch.tensor([tuple(target) + (EOS_ID,)], dtype=torch.long)
        logits = model(src, src_mask, tgt_in)
        mask = torch.ones_like(tgt_out, dtype=torch.float64)
        value = smoothed_cross_entropy(logits, tgt_out, mask, model.config.label_smoothing)
    finally:
        model.train(was_training)
    return value
