"""Typed errors shared across the toolkit.

Everything that stems from bad inputs (files, configs, token sequences)
derives from ``DataError`` so the CLI can map it to a single exit code.
"""

from __future__ import annotations


class DataError(Exception):
    """Base class for all input/data errors raised by this package."""


class DuplicateSurface(DataError):
    def __init__(self, surface: str):
        super().__init__(f"duplicate surface: {surface!r}")
        self.surface = surface


class MalformedSurface(DataError):
    def __init__(self, tag, surface: str, reason: str = ""):
        detail = f" ({reason})" if reason else ""
        super().__init__(f"malformed {getattr(tag, 'name', tag)} surface: {surface!r}{detail}")
        self.tag = tag
        self.surface = surface


class ReservedSurface(DataError):
    def __init__(self, surface: str):
        super().__init__(f"surface is reserved for a special token: {surface!r}")
        self.surface = surface


class UnknownId(DataError):
    def __init__(self, token_id: int, vocab_size: int):
        super().__init__(f"token id {token_id} out of range for vocab of size {vocab_size}")
        self.token_id = token_id


class UnknownSurface(DataError):
    def __init__(self, surface: str, line_no: int | None = None):
        where = f" (line {line_no})" if line_no is not None else ""
        super().__init__(f"unknown surface {surface!r}{where}")
        self.surface = surface
        self.line_no = line_no


class EmptyLanguageInventory(DataError):
    def __init__(self, detail: str):
        super().__init__(f"empty language inventory: {detail}")


class BadFractions(DataError):
    def __init__(self, fractions, reason: str):
        super().__init__(f"bad split fractions {fractions}: {reason}")


class ParseError(DataError):
    def __init__(self, message: str, line_no: int | None = None):
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}{message}")
        self.line_no = line_no


class SpecialTokenInInput(DataError):
    def __init__(self, token_id: int, position: int):
        super().__init__(f"special token id {token_id} at position {position} not allowed here")
        self.token_id = token_id
        self.position = position


class TooLong(DataError):
    def __init__(self, length: int, limit: int):
        super().__init__(f"sequence of length {length} exceeds max_len {limit}")
        self.length = length
        self.limit = limit


class PurityViolation(DataError):
    def __init__(self, token_id: int, segment: str):
        super().__init__(f"token id {token_id} is not allowed in the {segment} segment")
        self.token_id = token_id
        self.segment = segment


class EmptyTrainingSet(DataError):
    def __init__(self):
        super().__init__("training requires at least one (input, target) pair")


class LengthMismatch(DataError):
    def __init__(self, n_ref: int, n_hyp: int):
        super().__init__(f"reference/hypothesis count mismatch: {n_ref} vs {n_hyp}")


class SchemaMismatch(DataError):
    def __init__(self, a, b):
        super().__init__(f"report schema versions differ: {a} vs {b}")


class CheckpointError(DataError):
    """Base class for checkpoint container problems."""


class VersionMismatch(CheckpointError):
    def __init__(self, detail: str):
        super().__init__(f"bad checkpoint: {detail}")


class ShapeMismatch(CheckpointError):
    def __init__(self, detail: str):
        super().__init__(f"checkpoint does not fit: {detail}")
