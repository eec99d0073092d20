"""The visitor interaction workflow as a pure event-driven state machine.

One visitor pass: a page is presented, the visitor starts reading, words
arrive, the visitor stops, the words fall and dissolve on the display, the
page's video is revealed and pushed to the tower, and after a timeout the
next page is presented.

The machine itself never reads a clock and performs no I/O: every event
carries the monotonic time at which it occurred, transitions are a pure
function of (state, event), and side effects are returned as data for the
orchestrator to act on.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from enum import Enum
from typing import Union

from .catalog import Catalog, DiaryPage, SelectionHistory, select_next_page
from .errors import EmptyCatalog
from .transcript import FallParams, FallTimeline, TranscriptWord, schedule_word_fall


class SessionPhase(Enum):
    PAGE_PRESENTED = "PagePresented"
    READING = "Reading"
    WORD_FALL = "WordFall"
    REVEAL = "Reveal"


# --- events ------------------------------------------------------------------
# Every event is stamped with `at`, the monotonic ms at which it occurred,
# assigned by whoever owns the clock (server loop or simulator).

@dataclass(frozen=True)
class StartPressed:
    at: int


@dataclass(frozen=True)
class StopPressed:
    at: int


@dataclass(frozen=True)
class WordFinal:
    at: int
    word: TranscriptWord


@dataclass(frozen=True)
class AllWordsLanded:
    at: int


@dataclass(frozen=True)
class DissolveComplete:
    at: int


@dataclass(frozen=True)
class Tick:
    at: int


SessionEvent = Union[StartPressed, StopPressed, WordFinal, AllWordsLanded, DissolveComplete, Tick]


# --- effects -----------------------------------------------------------------

@dataclass(frozen=True)
class PresentPage:
    page_id: str


@dataclass(frozen=True)
class BeginCapture:
    locale: str


@dataclass(frozen=True)
class EndCapture:
    pass


@dataclass(frozen=True)
class EmitWordFall:
    timeline: FallTimeline


@dataclass(frozen=True)
class RevealVideo:
    page_id: str


@dataclass(frozen=True)
class PushToTower:
    page_id: str


Effect = Union[PresentPage, BeginCapture, EndCapture, EmitWordFall, RevealVideo, PushToTower]


@dataclass(frozen=True)
class SessionState:
    phase: SessionPhase
    page_id: str
    phase_entered_at: int
    words: tuple[TranscriptWord, ...]
    history: SelectionHistory
    rng_seed: int  # advances on every page draw; part of the state for purity


class SessionMachine:
    """Transition rules bound to a catalog and timing configuration.

    The catalog and parameters are immutable, so handle_event stays a pure
    function: identical (state, event) pairs always produce identical
    (state, effects).
    """

    def __init__(
        self,
        catalog: Catalog,
        fall_params: FallParams,
        reading_timeout_ms: int = 120_000,
        reveal_timeout_ms: int = 60_000,
        selection_window: int = 5,
    ):
        if not catalog.pages:
            raise EmptyCatalog("session machine needs at least one page")
        self.catalog = catalog
        self.fall_params = fall_params
        self.reading_timeout_ms = reading_timeout_ms
        self.reveal_timeout_ms = reveal_timeout_ms
        self.selection_window = selection_window

    # -- helpers --

    def page(self, state: SessionState) -> DiaryPage:
        return self.catalog.page(state.page_id)

    def _draw(
        self, history: SelectionHistory, seed: int
    ) -> tuple[DiaryPage, SelectionHistory, int]:
        rng = random.Random(seed)
        page, new_history = select_next_page(self.catalog, history, rng)
        return page, new_history, rng.getrandbits(64)

    def next_deadline(self, state: SessionState) -> int | None:
        """Monotonic ms at which a Tick would change state, if any."""
        if state.phase is SessionPhase.READING:
            return state.phase_entered_at + self.reading_timeout_ms
        if state.phase is SessionPhase.REVEAL:
            return state.phase_entered_at + self.reveal_timeout_ms
        return None

    # -- lifecycle --

    def init_session(self, seed: int, now: int = 0) -> tuple[SessionState, list[Effect]]:
        """Fresh machine: select and present the first page."""
        history = SelectionHistory(window=self.selection_window)
        page, history, next_seed = self._draw(history, seed)
        state = SessionState(
            phase=SessionPhase.PAGE_PRESENTED,
            page_id=page.page_id,
            phase_entered_at=now,
            words=(),
            history=history,
            rng_seed=next_seed,
        )
        return state, [PresentPage(page.page_id)]

    def handle_event(
        self, state: SessionState, event: SessionEvent
    ) -> tuple[SessionState, list[Effect]]:
        """Apply one event. Unexpected events are ignored, never errors."""
        phase = state.phase

        if phase is SessionPhase.PAGE_PRESENTED and isinstance(event, StartPressed):
            new = replace(state, phase=SessionPhase.READING, phase_entered_at=event.at)
            return new, [BeginCapture(self.page(state).locale)]

        if phase is SessionPhase.READING:
            if isinstance(event, WordFinal):
                # Re-sequence on append so seq stays strictly increasing
                # across recognizer segments within the session.
                word = replace(event.word, seq=len(state.words))
                return replace(state, words=state.words + (word,)), []
            if isinstance(event, StopPressed):
                return self._stop_reading(state, event.at)
            if isinstance(event, Tick):
                if event.at - state.phase_entered_at >= self.reading_timeout_ms:
                    return self._stop_reading(state, event.at)
                return state, []

        if phase is SessionPhase.WORD_FALL:
            if isinstance(event, AllWordsLanded):
                # Informational: the dissolve is already scheduled on the
                # display; nothing changes until DissolveComplete.
                return state, []
            if isinstance(event, DissolveComplete):
                new = replace(state, phase=SessionPhase.REVEAL, phase_entered_at=event.at)
                return new, [RevealVideo(state.page_id), PushToTower(state.page_id)]

        if phase is SessionPhase.REVEAL and isinstance(event, Tick):
            if event.at - state.phase_entered_at >= self.reveal_timeout_ms:
                page, history, next_seed = self._draw(state.history, state.rng_seed)
                new = SessionState(
                    phase=SessionPhase.PAGE_PRESENTED,
                    page_id=page.page_id,
                    phase_entered_at=event.at,
                    words=(),
                    history=history,
                    rng_seed=next_seed,
                )
                return new, [PresentPage(page.page_id)]
            return state, []

        return state, []

    def _stop_reading(self, state: SessionState, at: int) -> tuple[SessionState, list[Effect]]:
        if not state.words:
            # Most likely a mispress: return to the same page, ready to retry.
            new = replace(state, phase=SessionPhase.PAGE_PRESENTED, phase_entered_at=at)
            return new, [EndCapture()]
        timeline = schedule_word_fall(state.words, self.fall_params, t0=at)
        new = replace(state, phase=SessionPhase.WORD_FALL, phase_entered_at=at)
        return new, [EndCapture(), EmitWordFall(timeline)]
