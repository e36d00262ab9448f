"""Text simulation: fabricate language-specific predictions from transcripts.

Own-language tokens pass through unchanged. Each other-language token
independently becomes unk with probability ``p_unk``, otherwise a token
drawn uniformly from the own-language (non-special) inventory. At
``p_unk=1`` this degenerates to language-aware masking.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyLanguageInventory, SpecialTokenInInput
from .rng import SIDE_ENGLISH, SIDE_MANDARIN, derive_rng
from .vocab import UNK_ID, LanguageTag, Utterance, VocabSpec

SIDE_OF = {LanguageTag.MANDARIN: SIDE_MANDARIN, LanguageTag.ENGLISH: SIDE_ENGLISH}


@dataclass(frozen=True)
class SimParams:
    p_unk: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_unk <= 1.0:
            raise ValueError("p_unk must lie in [0, 1]")


def simulate_prediction(
    tokens: Utterance,
    lang: LanguageTag,
    params: SimParams,
    vocab: VocabSpec,
    utt_index: int = 0,
) -> Utterance:
    """Simulated ``lang``-side prediction; rng stream (seed, utt_index, side)."""
    if lang not in SIDE_OF:
        raise ValueError("lang must be Mandarin or English")
    pool = vocab.ids_with_tag(lang)
    has_other = any(
        vocab.classify(t) in (LanguageTag.MANDARIN, LanguageTag.ENGLISH)
        and vocab.classify(t) is not lang
        for t in tokens
    )
    if has_other and params.p_unk < 1.0 and not pool:
        raise EmptyLanguageInventory(f"no {lang.name} tokens to draw replacements from")

    rng = derive_rng(params.seed, utt_index, SIDE_OF[lang])
    out = []
    for pos, t in enumerate(tokens):
        tag = vocab.classify(t)
        if tag is LanguageTag.SPECIAL:
            raise SpecialTokenInInput(t, pos)
        if tag is lang:
            out.append(t)
        elif rng.random() < params.p_unk:
            out.append(UNK_ID)
        else:
            out.append(int(pool[rng.integers(0, len(pool))]))
    return tuple(out)


def simulate_pair(
    tokens: Utterance,
    params: SimParams,
    vocab: VocabSpec,
    utt_index: int = 0,
) -> tuple[Utterance, Utterance]:
    """(Mandarin-side, English-side) simulated predictions, independent streams."""
    sim_m = simulate_prediction(tokens, LanguageTag.MANDARIN, params, vocab, utt_index)
    sim_e = simulate_prediction(tokens, LanguageTag.ENGLISH, params, vocab, utt_index)
    return sim_m, sim_e


def simulate_corpus(utterances, params: SimParams, vocab: VocabSpec):
    """Aligned (pred_m, pred_e, target) triples in corpus order."""
    triples = []
    for i, utt in enumerate(utterances):
        sim_m, sim_e = simulate_pair(utt, params, vocab, utt_index=i)
        triples.append((sim_m, sim_e, utt))
    return triples
