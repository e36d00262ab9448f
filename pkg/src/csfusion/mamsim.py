"""Monolingual-recognizer emulation as a configurable noisy channel.

Two behavioral regimes are parameterized. A fine-tuned-style (FT)
recognizer keeps its own language and maps other-language tokens to unk.
A pretrained-style (PT) recognizer instead hallucinates runs of 1..k
own-language tokens over other-language input, the way a Mandarin-only
system renders an English word as similar-sounding characters. Own
tokens may additionally be substituted with probability ``p_own_sub``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import EmptyLanguageInventory, ParseError, SpecialTokenInInput
from .rng import derive_rng
from .textsim import SIDE_OF
from .vocab import UNK_ID, LanguageTag, Utterance, VocabSpec

MODE_PT = "PT"
MODE_FT = "FT"


@dataclass(frozen=True)
class MamNoiseConfig:
    mode: str
    p_own_sub: float
    p_other_unk: float
    other_expansion_range: tuple[int, int]
    seed: int

    def __post_init__(self):
        if self.mode not in (MODE_PT, MODE_FT):
            raise ValueError(f"mode must be PT or FT, got {self.mode!r}")
        for name in ("p_own_sub", "p_other_unk"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        lo, hi = self.other_expansion_range
        if lo < 1 or hi < lo:
            raise ValueError("other_expansion_range must satisfy 1 <= min <= max")

    @classmethod
    def ft(cls, seed: int, p_own_sub: float = 0.0, p_other_unk: float = 1.0) -> "MamNoiseConfig":
        return cls(MODE_FT, p_own_sub, p_other_unk, (1, 1), seed)

    @classmethod
    def pt(cls, seed: int, p_own_sub: float = 0.0, expansion: tuple[int, int] = (1, 2)) -> "MamNoiseConfig":
        return cls(MODE_PT, p_own_sub, 0.0, expansion, seed)

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "p_own_sub": self.p_own_sub,
            "p_other_unk": self.p_other_unk,
            "other_expansion_range": list(self.other_expansion_range),
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MamNoiseConfig":
        keys = {"mode", "p_own_sub", "p_other_unk", "other_expansion_range", "seed"}
        unknown = set(data) - keys
        if unknown:
            raise ParseError(f"unknown noise-config keys: {sorted(unknown)}")
        missing = keys - set(data)
        if missing:
            raise ParseError(f"missing noise-config keys: {sorted(missing)}")
        return cls(
            mode=data["mode"],
            p_own_sub=float(data["p_own_sub"]),
            p_other_unk=float(data["p_other_unk"]),
            other_expansion_range=tuple(int(x) for x in data["other_expansion_range"]),
            seed=int(data["seed"]),
        )


def load_noise_config(path) -> MamNoiseConfig:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in noise config: {exc}") from exc
    try:
        return MamNoiseConfig.from_json_dict(data)
    except (ValueError, TypeError) as exc:
        raise ParseError(f"invalid noise config: {exc}") from exc


def emulate(
    tokens: Utterance,
    lang: LanguageTag,
    cfg: MamNoiseConfig,
    vocab: VocabSpec,
    utt_index: int = 0,
) -> Utterance:
    """One recognizer's prediction for ``tokens``; stream (seed, utt_index, side)."""
    if lang not in SIDE_OF:
        raise ValueError("lang must be Mandarin or English")
    pool = vocab.ids_with_tag(lang)
    tags = []
    for pos, t in enumerate(tokens):
        tag = vocab.classify(t)
        if tag is LanguageTag.SPECIAL:
            raise SpecialTokenInInput(t, pos)
        tags.append(tag)
    needs_pool = (cfg.p_own_sub > 0 and any(t is lang for t in tags)) or (
        cfg.p_other_unk < 1.0 and any(t is not lang for t in tags)
    )
    if needs_pool and not pool:
        raise EmptyLanguageInventory(f"no {lang.name} tokens to draw from")

    lo, hi = cfg.other_expansion_range
    rng = derive_rng(cfg.seed, utt_index, SIDE_OF[lang])
    out = []
    for t, tag in zip(tokens, tags):
        if tag is lang:
            if rng.random() < cfg.p_own_sub:
                out.append(int(pool[rng.integers(0, len(pool))]))
            else:
                out.append(t)
        elif rng.random() < cfg.p_other_unk:
            out.append(UNK_ID)
        else:
            run = int(rng.integers(lo, hi + 1))
            out.extend(int(pool[rng.integers(0, len(pool))]) for _ in range(run))
    return tuple(out)


def emulate_corpus(utterances, cfg_m: MamNoiseConfig, cfg_e: MamNoiseConfig, vocab: VocabSpec):
    """Aligned (pred_m, pred_e, target) triples in corpus order."""
    triples = []
    for i, utt in enumerate(utterances):
        pred_m = emulate(utt, LanguageTag.MANDARIN, cfg_m, vocab, utt_index=i)
        pred_e = emulate(utt, LanguageTag.ENGLISH, cfg_e, vocab, utt_index=i)
        triples.append((pred_m, pred_e, utt))
    return triples
