"""Seeded synthetic code-switched corpora plus corpus/prediction file I/O.

Generation starts every utterance as Mandarin and, with probability
``cs_rate``, replaces contiguous runs with English spans (replacement,
not insertion, so the sampled length is preserved). Files hold one
utterance per line, surfaces separated by single spaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BadFractions, EmptyLanguageInventory, ParseError, UnknownSurface
from .rng import derive_rng
from .vocab import UNK_ID, LanguageTag, Utterance, VocabSpec, decode, encode


@dataclass(frozen=True)
class GenConfig:
    utterance_count: int
    len_range: tuple[int, int] = (8, 16)
    cs_rate: float = 0.5
    span_len_range: tuple[int, int] = (2, 4)
    spans_per_utt_range: tuple[int, int] = (1, 2)
    seed: int = 0

    def __post_init__(self):
        if self.utterance_count < 1:
            raise ValueError("utterance_count must be positive")
        for name in ("len_range", "span_len_range", "spans_per_utt_range"):
            lo, hi = getattr(self, name)
            if lo < 1 or hi < lo:
                raise ValueError(f"{name} must satisfy 1 <= min <= max, got ({lo}, {hi})")
        if not 0.0 <= self.cs_rate <= 1.0:
            raise ValueError("cs_rate must lie in [0, 1]")


@dataclass(frozen=True)
class Corpus:
    utterances: tuple[Utterance, ...]
    vocab: VocabSpec

    def __post_init__(self):
        for i, utt in enumerate(self.utterances):
            if not utt:
                raise ValueError(f"utterance {i} is empty")
            for t in utt:
                if self.vocab.classify(t) is LanguageTag.SPECIAL:
                    raise ValueError(f"utterance {i} contains special token id {t}")

    def __len__(self) -> int:
        return len(self.utterances)


def generate(config: GenConfig, vocab: VocabSpec) -> Corpus:
    """Deterministic corpus for (config, vocab); one rng stream per utterance."""
    mandarin = vocab.mandarin_ids
    english = vocab.english_ids
    word_initial = tuple(e for e in english if vocab.surface_of(e).startswith("_"))
    if not mandarin:
        raise EmptyLanguageInventory("generation needs at least one Mandarin token")
    if config.cs_rate > 0 and (not english or not word_initial):
        raise EmptyLanguageInventory("code-switching needs a word-initial English token")

    lo_len, hi_len = config.len_range
    lo_span, hi_span = config.span_len_range
    lo_k, hi_k = config.spans_per_utt_range

    utterances = []
    for i in range(config.utterance_count):
        rng = derive_rng(config.seed, i)
        length = int(rng.integers(lo_len, hi_len + 1))
        toks = [int(mandarin[j]) for j in rng.integers(0, len(mandarin), size=length)]
        if rng.random() < config.cs_rate:
            n_spans = int(rng.integers(lo_k, hi_k + 1))
            span_lens = []
            budget = length
            for _ in range(n_spans):
                want = int(rng.integers(lo_span, hi_span + 1))
                got = min(want, budget)  # clip to fit; drop spans once budget is gone
                if got >= 1:
                    span_lens.append(got)
                    budget -= got
            if span_lens:
                free = length - sum(span_lens)
                gaps = rng.multinomial(free, [1.0 / (len(span_lens) + 1)] * (len(span_lens) + 1))
                cursor = 0
                for gap, span_len in zip(gaps, span_lens):
                    cursor += int(gap)
                    toks[cursor] = int(word_initial[rng.integers(0, len(word_initial))])
                    for offset in range(1, span_len):
                        toks[cursor + offset] = int(english[rng.integers(0, len(english))])
                    cursor += span_len
        utterances.append(tuple(toks))
    return Corpus(tuple(utterances), vocab)


def save(corpus: Corpus, path) -> None:
    save_predictions(corpus.utterances, corpus.vocab, path)


def load(path, vocab: VocabSpec) -> Corpus:
    """Parse a corpus file; transcripts may not contain any special token."""
    utterances = _load_lines(path, vocab, allow_unk=False, allow_empty=False)
    return Corpus(tuple(utterances), vocab)


def save_predictions(sequences, vocab: VocabSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for seq in sequences:
            f.write(decode(seq, vocab) + "\n")


def load_predictions(path, vocab: VocabSpec) -> list[Utterance]:
    """Like :func:`load` but permits unk tokens and empty lines."""
    return _load_lines(path, vocab, allow_unk=True, allow_empty=True)


def _load_lines(path, vocab, allow_unk: bool, allow_empty: bool) -> list[Utterance]:
    out = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f.read().splitlines(), start=1):
            if not line.split():
                if allow_empty:
                    out.append(())
                    continue
                raise ParseError("empty utterance", line_no)
            try:
                tokens = encode(line, vocab)
            except UnknownSurface as exc:
                raise UnknownSurface(exc.surface, line_no) from exc
            for t in tokens:
                if vocab.classify(t) is LanguageTag.SPECIAL and not (allow_unk and t == UNK_ID):
                    raise ParseError(f"special token {vocab.surface_of(t)!r} in utterance", line_no)
            out.append(tokens)
    return out


def split(corpus: Corpus, fractions: tuple[float, float, float], seed: int) -> tuple[Corpus, Corpus, Corpus]:
    """Deterministic shuffle-split; floor sizes, remainder goes to train."""
    if len(fractions) != 3 or any(f <= 0 for f in fractions):
        raise BadFractions(fractions, "all three fractions must be positive")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise BadFractions(fractions, "fractions must sum to 1")
    n = len(corpus)
    n_dev = math.floor(fractions[1] * n + 1e-9)
    n_test = math.floor(fractions[2] * n + 1e-9)
    n_train = n - n_dev - n_test
    perm = derive_rng(seed).permutation(n)
    picks = [corpus.utterances[int(j)] for j in perm]
    return (
        Corpus(tuple(picks[:n_train]), corpus.vocab),
        Corpus(tuple(picks[n_train:n_train + n_dev]), corpus.vocab),
        Corpus(tuple(picks[n_train + n_dev:]), corpus.vocab),
    )
