"""Language-aware target construction.

All tokens of the other language are replaced position-wise by unk, so a
recognizer trained on the result attends only to its own language.
"""

from __future__ import annotations

from .errors import SpecialTokenInInput
from .vocab import UNK_ID, LanguageTag, Utterance, VocabSpec


def mask_to_language(tokens: Utterance, lang: LanguageTag, vocab: VocabSpec) -> Utterance:
    """Keep ``lang`` tokens, replace every other-language token with unk.

    unk maps to unk, which makes the operation idempotent; the remaining
    special tokens have no masking rule and are rejected.
    """
    if lang not in (LanguageTag.MANDARIN, LanguageTag.ENGLISH):
        raise ValueError("lang must be Mandarin or English")
    out = []
    for pos, t in enumerate(tokens):
        tag = vocab.classify(t)
        if tag is LanguageTag.SPECIAL and t != UNK_ID:
            raise SpecialTokenInInput(t, pos)
        out.append(t if tag is lang else UNK_ID)
    return tuple(out)


def mask_corpus(utterances, lang: LanguageTag, vocab: VocabSpec) -> list[Utterance]:
    return [mask_to_language(u, lang, vocab) for u in utterances]
