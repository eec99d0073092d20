"""Transcript normalization and the word-fall animation timeline.

The timeline is pure data: offsets in milliseconds from a start instant t0.
Its completion time is what gates the video reveal, so the arithmetic here
is deliberately exact integer work.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParams


@dataclass(frozen=True)
class TranscriptWord:
    text: str
    seq: int
    finalized: bool = True


def _trim(token: str) -> str:
    """Strip leading/trailing non-alphanumerics, keeping interior ones."""
    start = 0
    end = len(token)
    while start < end and not token[start].isalnum():
        start += 1
    while end > start and not token[end - 1].isalnum():
        end -= 1
    return token[start:end]


def tokenize(raw: str, locale: str = "et") -> list[TranscriptWord]:
    """Split a transcript into word tokens.

    Splits on Unicode whitespace, trims surrounding punctuation, keeps
    interior hyphens and apostrophes, and drops anything left without a
    letter or digit. Estonian and English both segment on spaces, so the
    locale tags the words without changing the rules.
    """
    words = []
    for chunk in raw.split():
        token = _trim(chunk)
        if token:
            words.append(TranscriptWord(text=token, seq=len(words)))
    return words


@dataclass(frozen=True)
class FallParams:
    stagger_ms: int = 250
    fall_ms: int = 1_500
    dissolve_ms: int = 2_000
    columns: int = 8

    def __post_init__(self) -> None:
        for name in ("stagger_ms", "fall_ms", "dissolve_ms", "columns"):
            if getattr(self, name) <= 0:
                raise InvalidParams(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class FallEntry:
    word: TranscriptWord
    fall_start: int
    land_at: int
    column: int

    def to_dict(self) -> dict:
        return {
            "text": self.word.text,
            "seq": self.word.seq,
            "fall_start": self.fall_start,
            "land_at": self.land_at,
            "column": self.column,
        }


@dataclass(frozen=True)
class FallTimeline:
    """Word-fall schedule; all offsets are ms relative to t0."""
    t0: int
    entries: tuple[FallEntry, ...]
    dissolve_start: int
    dissolve_end: int

    @property
    def duration_ms(self) -> int:
        return self.dissolve_end

    def to_dict(self) -> dict:
        return {
            "t0": self.t0,
            "entries": [e.to_dict() for e in self.entries],
            "dissolve_start": self.dissolve_start,
            "dissolve_end": self.dissolve_end,
        }


def schedule_word_fall(
    words: list[TranscriptWord] | tuple[TranscriptWord, ...],
    params: FallParams,
    t0: int = 0,
) -> FallTimeline:
    """Lay out the fall of each word and the closing dissolve.

    Word i starts falling at i x stagger and lands fall_ms later, cycling
    through the screen columns. The dissolve begins only once the last word
    has landed.
    """
    entries = []
    for i, word in enumerate(words):
        fall_start = i * params.stagger_ms
        entries.append(
            FallEntry(
                word=word,
                fall_start=fall_start,
                land_at=fall_start + params.fall_ms,
                column=i % params.columns,
            )
        )
    dissolve_start = max((e.land_at for e in entries), default=0)
    return FallTimeline(
        t0=t0,
        entries=tuple(entries),
        dissolve_start=dissolve_start,
        dissolve_end=dissolve_start + params.dissolve_ms,
    )
