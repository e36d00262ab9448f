"""Bilingual token inventory: language tags, text<->id codec, vocab files.

The id space is fixed: ids 0..3 are the reserved special tokens
(blank, unk, sos, eos), followed by user entries in the order given to
``build_vocab``. Mandarin units are single characters; English units are
BPE pieces where a leading "_" marks a word-initial piece. sos and eos
are distinct ids but share the rendered spelling ``<sos/eos>``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import (
    DuplicateSurface,
    MalformedSurface,
    ParseError,
    ReservedSurface,
    SpecialTokenInInput,
    UnknownId,
    UnknownSurface,
)


class LanguageTag(Enum):
    MANDARIN = "M"
    ENGLISH = "E"
    SPECIAL = "S"


BLANK_ID = 0
UNK_ID = 1
SOS_ID = 2
EOS_ID = 3

BLANK_SURFACE = "<blank>"
UNK_SURFACE = "<unk>"
SOS_EOS_SURFACE = "<sos/eos>"

#: Spellings that may never be used for regular vocabulary entries.
RESERVED_SURFACES = frozenset({BLANK_SURFACE, UNK_SURFACE, SOS_EOS_SURFACE})

_SPECIAL_SURFACES = (BLANK_SURFACE, UNK_SURFACE, SOS_EOS_SURFACE, SOS_EOS_SURFACE)

_ENGLISH_RE = re.compile(r"_?[A-Za-z]+")

Utterance = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class VocabSpec:
    """Immutable token<->id table. Build via :func:`build_vocab`."""

    surfaces: tuple[str, ...]
    tags: tuple[LanguageTag, ...]

    def __post_init__(self):
        lookup: dict[str, int] = {}
        for i, s in enumerate(self.surfaces):
            lookup.setdefault(s, i)
        object.__setattr__(self, "_surface_to_id", lookup)
        by_tag = {tag: tuple(i for i, t in enumerate(self.tags) if t is tag) for tag in LanguageTag}
        object.__setattr__(self, "_ids_by_tag", by_tag)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VocabSpec)
            and self.surfaces == other.surfaces
            and self.tags == other.tags
        )

    def __len__(self) -> int:
        return len(self.surfaces)

    @property
    def size(self) -> int:
        return len(self.surfaces)

    def classify(self, token_id: int) -> LanguageTag:
        """Stored language tag of ``token_id``."""
        if not 0 <= token_id < len(self.surfaces):
            raise UnknownId(token_id, len(self.surfaces))
        return self.tags[token_id]

    def surface_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self.surfaces):
            raise UnknownId(token_id, len(self.surfaces))
        return self.surfaces[token_id]

    def id_of(self, surface: str) -> int | None:
        """Id for a regular surface or unk; None when not encodable."""
        if surface in (BLANK_SURFACE, SOS_EOS_SURFACE):
            return None  # never valid inside a transcript
        return self._surface_to_id.get(surface)

    def ids_with_tag(self, tag: LanguageTag) -> tuple[int, ...]:
        return self._ids_by_tag[tag]

    @property
    def mandarin_ids(self) -> tuple[int, ...]:
        return self._ids_by_tag[LanguageTag.MANDARIN]

    @property
    def english_ids(self) -> tuple[int, ...]:
        return self._ids_by_tag[LanguageTag.ENGLISH]


def _check_surface_shape(surface: str, tag: LanguageTag) -> None:
    if tag is LanguageTag.MANDARIN:
        if len(surface) != 1:
            raise MalformedSurface(tag, surface, "must be a single character")
    elif tag is LanguageTag.ENGLISH:
        if not _ENGLISH_RE.fullmatch(surface):
            raise MalformedSurface(tag, surface, "must be ASCII letters with optional leading '_'")
    else:
        raise MalformedSurface(tag, surface, "entries may only be tagged Mandarin or English")


def build_vocab(entries: list[tuple[str, LanguageTag]]) -> VocabSpec:
    """VocabSpec with specials at ids 0-3 followed by ``entries`` in order."""
    surfaces = list(_SPECIAL_SURFACES)
    tags = [LanguageTag.SPECIAL] * 4
    seen = set(RESERVED_SURFACES)
    for surface, tag in entries:
        if surface in RESERVED_SURFACES:
            raise ReservedSurface(surface)
        if surface in seen:
            raise DuplicateSurface(surface)
        _check_surface_shape(surface, tag)
        seen.add(surface)
        surfaces.append(surface)
        tags.append(tag)
    return VocabSpec(tuple(surfaces), tuple(tags))


def encode(text: str, vocab: VocabSpec, permissive: bool = False) -> Utterance:
    """Map whitespace-separated surfaces to token ids.

    Unknown (or non-encodable special) surfaces raise UnknownSurface in
    strict mode and map to unk when ``permissive`` is set.
    """
    out = []
    for surface in text.split():
        token_id = vocab.id_of(surface)
        if token_id is None:
            if not permissive:
                raise UnknownSurface(surface)
            token_id = UNK_ID
        out.append(token_id)
    return tuple(out)


def decode(tokens: Utterance, vocab: VocabSpec) -> str:
    """Inverse of :func:`encode` for well-formed utterances."""
    return " ".join(vocab.surface_of(t) for t in tokens)


def validate_transcript(tokens: Utterance, vocab: VocabSpec, allow_unk: bool = False) -> None:
    """Reject ids that are out of range or special (optionally keeping unk)."""
    for pos, t in enumerate(tokens):
        if vocab.classify(t) is LanguageTag.SPECIAL and not (allow_unk and t == UNK_ID):
            raise SpecialTokenInInput(t, pos)


def save_vocab(vocab: VocabSpec, path) -> None:
    """Write one ``<surface>\\t<tag>`` line per regular entry (specials implicit)."""
    with open(path, "w", encoding="utf-8") as f:
        for surface, tag in zip(vocab.surfaces[4:], vocab.tags[4:]):
            f.write(f"{surface}\t{tag.value}\n")


def load_vocab(path) -> VocabSpec:
    entries = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f.read().splitlines(), start=1):
            if not line:
                raise ParseError("blank line in vocab file", line_no)
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"expected '<surface>\\t<tag>', got {line!r}", line_no)
            surface, tag_str = parts
            if tag_str == "M":
                tag = LanguageTag.MANDARIN
            elif tag_str == "E":
                tag = LanguageTag.ENGLISH
            else:
                raise ParseError(f"tag must be M or E, got {tag_str!r}", line_no)
            entries.append((surface, tag))
    return build_vocab(entries)
