import hypothesis
import pytest
import torch

from csfusion.vocab import LanguageTag, build_vocab

hypothesis.settings.register_profile(
    "default", max_examples=50, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("default")

torch.set_num_threads(1)

M = LanguageTag.MANDARIN
E = LanguageTag.ENGLISH


def make_vocab(n_mandarin=20, n_english=12):
    """n_mandarin CJK chars plus n_english BPE pieces (2/3 word-initial)."""
    entries = [(chr(0x4E00 + i), M) for i in range(n_mandarin)]
    pieces = []
    consonants = "bcdfghjklmnpqrstvwxz"
    vowels = "aeiou"
    i = 0
    while len(pieces) < n_english:
        syl = consonants[i % len(consonants)] + vowels[i % len(vowels)] + consonants[(i * 7 + 3) % len(consonants)]
        pieces.append("_" + syl if i % 3 != 2 else syl)
        i += 1
    entries += [(p, E) for p in pieces]
    return build_vocab(entries)


@pytest.fixture(scope="session")
def vocab():
    return make_vocab()


@pytest.fixture(scope="session")
def cjk_bpe_vocab():
    """Vocab holding the mixed-script example sentences used in scoring tests."""
    chars = "非常以及每次口译第一首歌应景可"
    pieces = ["_interpret", "er", "_friend", "ly", "_sleep", "_tight", "or", "ed", "_it", "_means"]
    return build_vocab([(c, M) for c in chars] + [(p, E) for p in pieces])
