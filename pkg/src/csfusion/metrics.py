"""Mixed error rate scoring over language-attributed units.

Token sequences are first re-assembled into scoring units: Mandarin
characters stay single units, English BPE pieces merge into words (a
"_"-initial piece opens a word, following plain pieces extend it), and
unk becomes its own Mandarin-class unit. Units are aligned by uniform
1/1/1 Levenshtein distance; substitutions and deletions are attributed
to the reference unit's language, insertions to the hypothesis unit's
language, except that inserted unk units count toward the mixed rate
only. The mixed rate pools every edit over the total reference length.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import LengthMismatch, SpecialTokenInInput
from .vocab import UNK_ID, UNK_SURFACE, LanguageTag, Utterance, VocabSpec


@dataclass(frozen=True)
class ScoringUnit:
    surface: str
    lang: LanguageTag


UNK_UNIT = ScoringUnit(UNK_SURFACE, LanguageTag.MANDARIN)


class OpKind(Enum):
    MATCH = "match"
    SUBSTITUTE = "sub"
    DELETE = "del"
    INSERT = "ins"


@dataclass(frozen=True)
class AlignmentOp:
    kind: OpKind
    ref_unit: ScoringUnit | None
    hyp_unit: ScoringUnit | None


@dataclass
class LangCounts:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    ref_len: int = 0

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    def to_json_dict(self) -> dict:
        return {
            "sub": self.substitutions,
            "del": self.deletions,
            "ins": self.insertions,
            "ref_len": self.ref_len,
        }


@dataclass(frozen=True)
class ScoreReport:
    mer: float
    cer: float
    wer: float
    mandarin: LangCounts
    english: LangCounts
    unk_insertions: int
    utterances: int
    cer_defined: bool
    wer_defined: bool

    def to_json_dict(self) -> dict:
        return {
            "mer": self.mer,
            "cer": self.cer,
            "wer": self.wer,
            "counts": {"M": self.mandarin.to_json_dict(), "E": self.english.to_json_dict()},
            "unk_ins": self.unk_insertions,
            "utterances": self.utterances,
            "cer_defined": self.cer_defined,
            "wer_defined": self.wer_defined,
        }


def to_units(tokens: Utterance, vocab: VocabSpec) -> list[ScoringUnit]:
    """Deterministic unit assembly; a plain piece with no open word starts one."""
    units: list[ScoringUnit] = []
    word: list[str] | None = None

    def flush():
        nonlocal word
        if word is not None:
            units.append(ScoringUnit("".join(word), LanguageTag.ENGLISH))
            word = None

    for pos, t in enumerate(tokens):
        tag = vocab.classify(t)
        if t == UNK_ID:
            flush()
            units.append(UNK_UNIT)
        elif tag is LanguageTag.MANDARIN:
            flush()
            units.append(ScoringUnit(vocab.surface_of(t), LanguageTag.MANDARIN))
        elif tag is LanguageTag.ENGLISH:
            piece = vocab.surface_of(t)
            if piece.startswith("_"):
                flush()
                word = [piece[1:]]
            elif word is None:
                word = [piece]
            else:
                word.append(piece)
        else:
            raise SpecialTokenInInput(t, pos)
    flush()
    return units


def align(ref: list[ScoringUnit], hyp: list[ScoringUnit]) -> list[AlignmentOp]:
    """Minimal-cost alignment; ties break Match > Substitute > Delete > Insert."""
    n, m = len(ref), len(hyp)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row, prev = dist[i], dist[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (0 if ref[i - 1] == hyp[j - 1] else 1)
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)

    ops: list[AlignmentOp] = []
    i, j = n, m
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and ref[i - 1] == hyp[j - 1] and here == dist[i - 1][j - 1]:
            ops.append(AlignmentOp(OpKind.MATCH, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and here == dist[i - 1][j - 1] + 1:
            ops.append(AlignmentOp(OpKind.SUBSTITUTE, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i > 0 and here == dist[i - 1][j] + 1:
            ops.append(AlignmentOp(OpKind.DELETE, ref[i - 1], None))
            i = i - 1
        else:
            ops.append(AlignmentOp(OpKind.INSERT, None, hyp[j - 1]))
            j = j - 1
    ops.reverse()
    return ops


def _accumulate(ops: list[AlignmentOp], mandarin: LangCounts, english: LangCounts) -> int:
    """Fold one alignment into per-language counts; returns unk insertions."""
    unk_ins = 0
    by_lang = {LanguageTag.MANDARIN: mandarin, LanguageTag.ENGLISH: english}
    for op in ops:
        if op.ref_unit is not None:
            counts = by_lang[op.ref_unit.lang]
            counts.ref_len += 1
            if op.kind is OpKind.SUBSTITUTE:
                counts.substitutions += 1
            elif op.kind is OpKind.DELETE:
                counts.deletions += 1
        else:
            if op.hyp_unit == UNK_UNIT:
                unk_ins += 1
            else:
                by_lang[op.hyp_unit.lang].insertions += 1
    return unk_ins


def score(refs, hyps: list[Utterance], vocab: VocabSpec) -> ScoreReport:
    """Corpus-level MER/CER/WER; zero denominators report rate 0 with a flag."""
    ref_utts = refs.utterances if hasattr(refs, "utterances") else refs
    if len(ref_utts) != len(hyps):
        raise LengthMismatch(len(ref_utts), len(hyps))
    mandarin, english = LangCounts(), LangCounts()
    unk_ins = 0
    for ref_tokens, hyp_tokens in zip(ref_utts, hyps):
        ops = align(to_units(ref_tokens, vocab), to_units(hyp_tokens, vocab))
        unk_ins += _accumulate(ops, mandarin, english)

    total_ref = mandarin.ref_len + english.ref_len
    total_err = mandarin.errors + english.errors + unk_ins
    mer = total_err / total_ref if total_ref else 0.0
    cer = mandarin.errors / mandarin.ref_len if mandarin.ref_len else 0.0
    wer = english.errors / english.ref_len if english.ref_len else 0.0
    return ScoreReport(
        mer=mer,
        cer=cer,
        wer=wer,
        mandarin=mandarin,
        english=english,
        unk_insertions=unk_ins,
        utterances=len(ref_utts),
        cer_defined=mandarin.ref_len > 0,
        wer_defined=english.ref_len > 0,
    )
