"""Engine core: serializes every event into the session machine and fans
effects out as protocol messages.

The orchestrator is transport-agnostic. The network server and the display
simulator both drive it through the same three entry points (connect,
handle_message, tick), each stamped with the caller's monotonic clock, so
engine behaviour is identical under real sockets and simulated time.

All mutable state lives here and is touched only by the owner's single
event loop; the machine underneath is pure.
"""

from __future__ import annotations

import logging
from datetime import datetime, timezone
from typing import Callable

from .catalog import Catalog, DiaryPage, archive_link
from .config import EngineConfig
from .errors import DuplicateRole, RoleViolation, SchemaViolation
from .journal import JournalRecord, TowerJournal
from .protocol import (
    ADMIN,
    DISPLAY,
    KIOSK,
    OutboundCounter,
    SeqTracker,
    check_role_may_send,
    make_message,
    validate_message,
)
from .scheduler import (
    FramePointer,
    SyncReport,
    TowerEntry,
    TowerState,
    push_video,
    sync_check,
)
from .session import (
    BeginCapture,
    DissolveComplete,
    Effect,
    EmitWordFall,
    EndCapture,
    PresentPage,
    PushToTower,
    RevealVideo,
    SessionMachine,
    SessionPhase,
    SessionState,
    StartPressed,
    StopPressed,
    Tick,
    WordFinal,
)
from .transcript import FallParams, FallTimeline, tokenize

logger = logging.getLogger(__name__)

HEARTBEAT_INTERVAL_MS = 5_000
HEARTBEAT_MISSES = 3

ALERT_DISPLAY_UNRESPONSIVE = "display_unresponsive"
ALERT_SYNC_DRIFT = "sync_drift"

Outbound = tuple[str, dict]  # (target role, wire message)


def _default_wall_clock() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


class Orchestrator:
    """Owns session state, the tower, and all connected roles."""

    def __init__(
        self,
        config: EngineConfig,
        catalog: Catalog,
        seed: int,
        journal_path: str | None = None,
        now: int = 0,
        wall_clock: Callable[[], str] | None = None,
    ):
        self.config = config
        self.catalog = catalog
        self.assets = catalog.assets()
        self.wall_clock = wall_clock or _default_wall_clock
        self.machine = SessionMachine(
            catalog,
            FallParams(
                stagger_ms=config.word_stagger_ms,
                fall_ms=config.word_fall_ms,
                dissolve_ms=config.dissolve_ms,
                columns=config.fall_columns,
            ),
            reading_timeout_ms=config.reading_timeout_ms,
            reveal_timeout_ms=config.reveal_timeout_ms,
            selection_window=config.selection_window,
        )

        self.journal = TowerJournal(journal_path) if journal_path else None
        self.tower = TowerState(capacity=config.tower_capacity)
        if self.journal:
            for record in self.journal.replay(config.tower_capacity):
                # Restored loops restart at boot: the old monotonic timeline
                # did not survive the process.
                entry = TowerEntry(
                    asset_id=record.asset_id,
                    page_id=record.page_id,
                    epoch=now,
                    contributed_at=record.ts,
                )
                self.tower = TowerState(
                    capacity=self.tower.capacity, slots=self.tower.slots + (entry,)
                )

        self.state: SessionState
        self.state, effects = self.machine.init_session(seed, now)

        self._connected: dict[str, bool] = {KIOSK: False, DISPLAY: False}
        self._admins = 0
        self._trackers: dict[str, SeqTracker] = {}
        self._out_seq = OutboundCounter()
        self._display_last_seen: int | None = None
        self._wordfall: FallTimeline | None = None
        self._pending_reveal: str | None = None
        self.alerts: list[str] = []
        self.sync_reports: list[SyncReport] = []
        self.transitions: list[tuple[str, int]] = [(self.state.phase.value, now)]

        # The boot-time PresentPage has no audience yet; late joiners get
        # the page on connect.
        self._apply_effects(effects, now)

    # ------------------------------------------------------------------
    # connections
    # ------------------------------------------------------------------

    def connect(self, role: str, hello: dict, now: int) -> list[Outbound]:
        """Register a connection after its hello message.

        Kiosk and display are exclusive. The reply brings the newcomer up
        to date: current page for the kiosk, page plus tower for the
        display.
        """
        validate_message(hello)
        if hello["type"] != "hello":
            raise SchemaViolation("first message must be hello")
        if role not in (KIOSK, DISPLAY, ADMIN):
            raise RoleViolation(f"unknown role {role!r}")
        if role in (KIOSK, DISPLAY):
            if self._connected[role]:
                raise DuplicateRole(f"a {role} connection is already active")
            self._connected[role] = True
        else:
            self._admins += 1
        self._trackers[role] = SeqTracker()
        self._trackers[role].check(hello["seq"])
        self._out_seq.reset(role)
        if role == DISPLAY:
            self._display_last_seen = now
            self._clear_alert(ALERT_DISPLAY_UNRESPONSIVE)

        out: list[Outbound] = []
        if role in (KIOSK, DISPLAY):
            out.append(self._page_present_message(role, self.current_page(), now))
        if role == DISPLAY:
            out.append(self._tower_update_message(now, revealed=None, evicted=None))
            if self.state.phase is SessionPhase.WORD_FALL and self._wordfall:
                out.append(self._wordfall_message(self._wordfall, now))
        return out

    def disconnect(self, role: str) -> None:
        if role in (KIOSK, DISPLAY):
            self._connected[role] = False
        elif role == ADMIN and self._admins:
            self._admins -= 1
        self._trackers.pop(role, None)
        self._out_seq.reset(role)

    def connected_roles(self) -> dict:
        return {
            KIOSK: self._connected[KIOSK],
            DISPLAY: self._connected[DISPLAY],
            "admins": self._admins,
        }

    # ------------------------------------------------------------------
    # inbound traffic
    # ------------------------------------------------------------------

    def handle_message(self, role: str, msg: dict, now: int) -> list[Outbound]:
        """Validate and dispatch one inbound message.

        Raises SchemaViolation / RoleViolation; the transport rejects the
        message but keeps the connection.
        """
        validate_message(msg)
        msg_type = msg["type"]
        check_role_may_send(role, msg_type)
        tracker = self._trackers.get(role)
        if tracker is None:
            raise RoleViolation(f"role {role!r} is not connected")
        tracker.check(msg["seq"])

        if role == DISPLAY:
            self._display_last_seen = now
            self._clear_alert(ALERT_DISPLAY_UNRESPONSIVE)

        body = msg["body"]
        if msg_type == "session.start":
            return self._feed(StartPressed(at=now), now)
        if msg_type == "session.stop":
            return self._feed(StopPressed(at=now), now)
        if msg_type == "transcript.final":
            out: list[Outbound] = []
            for word in tokenize(body["text"]):
                out.extend(self._feed(WordFinal(at=now, word=word), now))
            return out
        if msg_type == "transcript.partial":
            return []  # kiosk-local preview only; never reaches the machine
        if msg_type == "anim.done":
            # Guard against stale completions from an earlier word fall.
            if self._wordfall is not None and body["t0"] == self._wordfall.t0:
                return self._feed(DissolveComplete(at=now), now)
            return []
        if msg_type == "tick.sync":
            return self._handle_tick_sync(role, body, now)
        if msg_type == "snapshot.request":
            return [self._snapshot_message(role, now)]
        raise RoleViolation(f"role {role!r} may not send {msg_type!r}")

    def _handle_tick_sync(self, role: str, body: dict, now: int) -> list[Outbound]:
        out = [
            (
                role,
                self._make(role, "tick.sync", now, {"t1": body["t1"], "t2": now, "t3": now}),
            )
        ]
        frames = body.get("frames")
        if role == DISPLAY and frames:
            pointers = []
            for item in frames:
                if not isinstance(item, dict):
                    raise SchemaViolation("tick.sync: frames entries must be objects")
                # The server's receive time is authoritative: a skewed
                # display clock must show up as frame drift, not hide in
                # a skewed report timestamp.
                pointers.append(
                    FramePointer(screen=int(item["screen"]), frame=int(item["frame"]), at=now)
                )
            self.check_sync(pointers)
        return out

    def check_sync(self, pointers: list[FramePointer]) -> SyncReport:
        report = sync_check(
            self.tower, self.assets, pointers, self.config.sync_tolerance_frames
        )
        self.sync_reports.append(report)
        if report.flagged:
            self._raise_alert(ALERT_SYNC_DRIFT)
            for entry in report.flagged:
                logger.warning(
                    "screen %d drifted %d frames (reported %d, expected %d)",
                    entry.screen, entry.drift, entry.reported, entry.expected,
                )
        else:
            self._clear_alert(ALERT_SYNC_DRIFT)
        return report

    # ------------------------------------------------------------------
    # timers
    # ------------------------------------------------------------------

    def tick(self, now: int) -> list[Outbound]:
        """Advance engine timers to `now`.

        Reveal progression is withheld while the display is unresponsive:
        with no display there is nothing to reveal onto, and guessing would
        desynchronize the logical and visual state.
        """
        out: list[Outbound] = []
        display_ok = self.display_alive(now)
        if not display_ok and self.state.phase in (SessionPhase.WORD_FALL, SessionPhase.REVEAL):
            self._raise_alert(ALERT_DISPLAY_UNRESPONSIVE)
        if self.state.phase is SessionPhase.READING or (
            self.state.phase is SessionPhase.REVEAL and display_ok
        ):
            out.extend(self._feed(Tick(at=now), now))
        return out

    def next_deadline(self) -> int | None:
        return self.machine.next_deadline(self.state)

    def display_alive(self, now: int) -> bool:
        if not self._connected[DISPLAY] or self._display_last_seen is None:
            return False
        return now - self._display_last_seen <= HEARTBEAT_INTERVAL_MS * HEARTBEAT_MISSES

    # ------------------------------------------------------------------
    # machine plumbing
    # ------------------------------------------------------------------

    def _feed(self, event, now: int) -> list[Outbound]:
        old_phase = self.state.phase
        self.state, effects = self.machine.handle_event(self.state, event)
        if self.state.phase is not old_phase:
            self.transitions.append((self.state.phase.value, now))
        return self._apply_effects(effects, now)

    def _apply_effects(self, effects: list[Effect], now: int) -> list[Outbound]:
        out: list[Outbound] = []
        for effect in effects:
            if isinstance(effect, PresentPage):
                page = self.catalog.page(effect.page_id)
                out.append(self._page_present_message(KIOSK, page, now))
                out.append(self._page_present_message(DISPLAY, page, now))
            elif isinstance(effect, BeginCapture):
                out.append((KIOSK, self._make(KIOSK, "capture.begin", now, {"locale": effect.locale})))
            elif isinstance(effect, EndCapture):
                out.append((KIOSK, self._make(KIOSK, "capture.end", now, {})))
            elif isinstance(effect, EmitWordFall):
                self._wordfall = effect.timeline
                out.append(self._wordfall_message(effect.timeline, now))
            elif isinstance(effect, RevealVideo):
                # Rides the tower.update emitted by the paired PushToTower.
                self._pending_reveal = effect.page_id
            elif isinstance(effect, PushToTower):
                out.append(self._push_to_tower(effect.page_id, now))
            else:  # pragma: no cover - exhaustive over Effect
                raise AssertionError(f"unhandled effect {effect!r}")
        return out

    def _push_to_tower(self, page_id: str, now: int) -> Outbound:
        asset = self.catalog.page(page_id).video
        wall = self.wall_clock()
        self.tower, evicted = push_video(self.tower, asset, now, contributed_at=wall)
        if self.journal:
            self.journal.append(
                JournalRecord(ts=wall, op="push", asset_id=asset.asset_id, page_id=page_id)
            )
            if evicted:
                self.journal.append(
                    JournalRecord(
                        ts=wall, op="evict",
                        asset_id=evicted.asset_id, page_id=evicted.page_id,
                    )
                )
        revealed, self._pending_reveal = self._pending_reveal, None
        return self._tower_update_message(now, revealed=revealed, evicted=evicted)

    # ------------------------------------------------------------------
    # outbound message builders
    # ------------------------------------------------------------------

    def _make(self, peer: str, msg_type: str, now: int, body: dict) -> dict:
        msg = make_message(msg_type, self._out_seq.take(peer), now, body)
        return validate_message(msg)

    def _page_present_message(self, target: str, page: DiaryPage, now: int) -> Outbound:
        url, qr_payload = archive_link(page, self.config.muis_base_url)
        body = {
            "page_id": page.page_id,
            "title": page.title,
            "image_url": f"/pages/{page.image_ref}",
            "locale": page.locale,
            "archive_url": url,
            "qr_payload": qr_payload.decode("ascii"),
        }
        return (target, self._make(target, "page.present", now, body))

    def _wordfall_message(self, timeline: FallTimeline, now: int) -> Outbound:
        body = timeline.to_dict()
        body["dissolve_ms"] = self.config.dissolve_ms
        return (DISPLAY, self._make(DISPLAY, "anim.wordfall", now, body))

    def _tower_update_message(
        self, now: int, revealed: str | None, evicted: TowerEntry | None
    ) -> Outbound:
        body = {
            "slots": [e.to_dict() for e in self.tower.slots],
            "revealed_page_id": revealed,
            "evicted": evicted.to_dict() if evicted else None,
        }
        return (DISPLAY, self._make(DISPLAY, "tower.update", now, body))

    def _snapshot_message(self, target: str, now: int) -> Outbound:
        return (target, self._make(target, "snapshot", now, self.snapshot(now)))

    # ------------------------------------------------------------------
    # introspection
    # ------------------------------------------------------------------

    def current_page(self) -> DiaryPage:
        return self.catalog.page(self.state.page_id)

    def snapshot(self, now: int) -> dict:
        """Full engine state document.

        Carries everything a reconnecting display needs to rebuild its
        frame schedule bit-identically: slot epochs live here, never on
        the display.
        """
        page = self.current_page()
        url, qr_payload = archive_link(page, self.config.muis_base_url)
        return {
            "phase": self.state.phase.value,
            "phase_entered_at": self.state.phase_entered_at,
            "page": {
                "page_id": page.page_id,
                "title": page.title,
                "image_url": f"/pages/{page.image_ref}",
                "locale": page.locale,
                "archive_url": url,
                "qr_payload": qr_payload.decode("ascii"),
            },
            "words": [w.text for w in self.state.words],
            "tower": {
                "capacity": self.tower.capacity,
                "slots": [e.to_dict() for e in self.tower.slots],
            },
            "wordfall": (
                self._wordfall.to_dict()
                if self._wordfall and self.state.phase is SessionPhase.WORD_FALL
                else None
            ),
            "connected": self.connected_roles(),
            "alerts": list(self.alerts),
            "server_now": now,
        }

    def _raise_alert(self, name: str) -> None:
        if name not in self.alerts:
            self.alerts.append(name)
            logger.warning("alert raised: %s", name)

    def _clear_alert(self, name: str) -> None:
        if name in self.alerts:
            self.alerts.remove(name)
