import itertools

import pytest

from towerloop.config import EngineConfig
from towerloop.errors import DuplicateRole, RoleViolation, SchemaViolation
from towerloop.orchestrator import (
    ALERT_DISPLAY_UNRESPONSIVE,
    HEARTBEAT_INTERVAL_MS,
    HEARTBEAT_MISSES,
    Orchestrator,
)
from towerloop.protocol import make_message, validate_message
from towerloop.scheduler import frame_at
from towerloop.session import SessionPhase


def wall():
    counter = itertools.count()
    return lambda: f"2025-01-01T00:00:{next(counter):02d}.000+00:00"


@pytest.fixture
def engine(scenario_catalog):
    return Orchestrator(
        EngineConfig(), scenario_catalog, seed=7, now=0, wall_clock=wall()
    )


class Peer:
    """Tiny scripted client: tracks its own seq, collects what it receives."""

    def __init__(self, engine, role, now=0):
        self.engine = engine
        self.role = role
        self.seq = itertools.count()
        self.inbox = []
        self.receive(engine.connect(role, self.hello(now), now))

    def hello(self, now):
        return make_message("hello", next(self.seq), now, {"role": self.role})

    def send(self, msg_type, body, now):
        msg = make_message(msg_type, next(self.seq), now, body)
        out = self.engine.handle_message(self.role, msg, now)
        self.receive(out)
        return out

    def receive(self, outbound):
        self.inbox.extend(m for target, m in outbound if target == self.role)

    def received_types(self):
        return [m["type"] for m in self.inbox]


def run_full_session(engine, kiosk, display, t0=1000):
    kiosk.send("session.start", {}, t0)
    kiosk.send("transcript.final", {"text": "vanad sõnad elavad"}, t0 + 500)
    kiosk.send("session.stop", {}, t0 + 1000)
    wordfall = engine._wordfall
    done_at = wordfall.t0 + wordfall.dissolve_end
    display.send("anim.done", {"t0": wordfall.t0, "completed_at": done_at}, done_at)
    return done_at


class TestConnections:
    def test_second_kiosk_refused(self, engine):
        Peer(engine, "kiosk")
        with pytest.raises(DuplicateRole):
            Peer(engine, "kiosk")

    def test_reconnect_after_disconnect(self, engine):
        Peer(engine, "kiosk")
        engine.disconnect("kiosk")
        kiosk = Peer(engine, "kiosk", now=50)
        assert kiosk.received_types() == ["page.present"]
        assert kiosk.inbox[0]["seq"] == 0  # fresh outbound stream

    def test_display_greeted_with_page_and_tower(self, engine):
        display = Peer(engine, "display")
        assert display.received_types() == ["page.present", "tower.update"]

    def test_hello_must_be_hello(self, engine):
        with pytest.raises(SchemaViolation):
            engine.connect("kiosk", make_message("session.start", 0, 0, {}), 0)


class TestDispatch:
    def test_session_start_begins_capture(self, engine):
        kiosk = Peer(engine, "kiosk")
        out = kiosk.send("session.start", {}, 1000)
        assert engine.state.phase is SessionPhase.READING
        assert [m["type"] for _, m in out] == ["capture.begin"]
        assert out[0][1]["body"]["locale"] == engine.current_page().locale

    def test_out_of_phase_transcript_ignored(self, engine):
        kiosk = Peer(engine, "kiosk")
        out = kiosk.send("transcript.final", {"text": "enne algust"}, 500)
        assert out == []
        assert engine.state.phase is SessionPhase.PAGE_PRESENTED

    def test_anim_done_pushes_tower(self, engine):
        kiosk = Peer(engine, "kiosk")
        display = Peer(engine, "display")
        run_full_session(engine, kiosk, display)
        assert engine.state.phase is SessionPhase.REVEAL
        update = display.inbox[-1]
        assert update["type"] == "tower.update"
        slots = update["body"]["slots"]
        assert len(slots) == 1
        assert update["body"]["revealed_page_id"] == slots[0]["page_id"]

    def test_stale_anim_done_ignored(self, engine):
        kiosk = Peer(engine, "kiosk")
        display = Peer(engine, "display")
        kiosk.send("session.start", {}, 1000)
        kiosk.send("transcript.final", {"text": "üks kaks"}, 1200)
        kiosk.send("session.stop", {}, 2000)
        out = display.send("anim.done", {"t0": 1, "completed_at": 3}, 2500)
        assert out == []
        assert engine.state.phase is SessionPhase.WORD_FALL

    def test_display_may_not_drive_sessions(self, engine):
        display = Peer(engine, "display")
        with pytest.raises(RoleViolation):
            display.send("session.start", {}, 100)

    def test_seq_must_increase(self, engine):
        kiosk = Peer(engine, "kiosk")
        msg = make_message("session.start", 0, 10, {})  # seq 0 reused
        with pytest.raises(SchemaViolation):
            engine.handle_message("kiosk", msg, 10)

    def test_partial_transcripts_never_reach_the_machine(self, engine):
        kiosk = Peer(engine, "kiosk")
        kiosk.send("session.start", {}, 100)
        kiosk.send("transcript.partial", {"text": "poolik"}, 200)
        assert engine.state.words == ()

    def test_tick_sync_reply_carries_server_times(self, engine):
        kiosk = Peer(engine, "kiosk")
        out = kiosk.send("tick.sync", {"t1": 77}, 400)
        body = out[0][1]["body"]
        assert body == {"t1": 77, "t2": 400, "t3": 400}

    def test_every_outbound_message_validates(self, engine):
        kiosk = Peer(engine, "kiosk")
        display = Peer(engine, "display")
        done_at = run_full_session(engine, kiosk, display)
        engine.tick(done_at + 60_000)
        for msg in kiosk.inbox + display.inbox:
            assert validate_message(msg)


class TestTimers:
    def test_reveal_timeout_presents_next_page(self, engine):
        kiosk = Peer(engine, "kiosk")
        display = Peer(engine, "display")
        done_at = run_full_session(engine, kiosk, display)
        first_page = engine.current_page().page_id
        display.send("tick.sync", {"t1": done_at + 59_000}, done_at + 59_000)
        assert engine.tick(done_at + 59_999) == []
        out = engine.tick(done_at + 60_000)
        assert engine.state.phase is SessionPhase.PAGE_PRESENTED
        assert engine.current_page().page_id != first_page
        assert {m["type"] for _, m in out} == {"page.present"}

    def test_reveal_frozen_while_display_unresponsive(self, engine):
        kiosk = Peer(engine, "kiosk")
        display = Peer(engine, "display")
        done_at = run_full_session(engine, kiosk, display)
        stale = done_at + HEARTBEAT_INTERVAL_MS * HEARTBEAT_MISSES + 1
        # no display heartbeats arrive; the reveal must hold
        out = engine.tick(max(stale, done_at + 80_000))
        assert engine.state.phase is SessionPhase.REVEAL
        assert out == []
        assert ALERT_DISPLAY_UNRESPONSIVE in engine.alerts
        # display comes back: alert clears and the reveal may progress
        display.send("tick.sync", {"t1": done_at + 90_000}, done_at + 90_000)
        assert ALERT_DISPLAY_UNRESPONSIVE not in engine.alerts
        engine.tick(done_at + 90_001)
        assert engine.state.phase is SessionPhase.PAGE_PRESENTED

    def test_reading_timeout_not_gated_on_display(self, engine):
        kiosk = Peer(engine, "kiosk")
        kiosk.send("session.start", {}, 0)
        engine.tick(EngineConfig().reading_timeout_ms)
        assert engine.state.phase is SessionPhase.PAGE_PRESENTED  # zero words


class TestSnapshot:
    def test_fresh_boot_state(self, engine):
        snap = engine.snapshot(0)
        assert snap["phase"] == "PagePresented"
        assert snap["tower"]["slots"] == []
        assert snap["page"]["archive_url"].startswith("https://www.muis.ee/")
        assert validate_message(
            make_message("snapshot", 0, 0, snap)
        )

    def test_snapshot_after_interaction_shows_push(self, engine):
        kiosk = Peer(engine, "kiosk")
        display = Peer(engine, "display")
        run_full_session(engine, kiosk, display)
        snap = engine.snapshot(10_000)
        assert len(snap["tower"]["slots"]) == 1
        assert snap["tower"]["slots"][0]["asset_id"] == engine.tower.slots[0].asset_id

    def test_display_reconnect_reconstructs_frame_schedule(self, engine, scenario_catalog):
        kiosk = Peer(engine, "kiosk")
        display = Peer(engine, "display")
        done_at = run_full_session(engine, kiosk, display)
        slots_before = engine.snapshot(done_at)["tower"]["slots"]

        engine.disconnect("display")
        display2 = Peer(engine, "display", now=done_at + 5_000)
        out = display2.send("snapshot.request", {}, done_at + 5_000)
        slots_after = out[0][1]["body"]["tower"]["slots"]
        assert slots_after == slots_before

        assets = scenario_catalog.assets()
        sample_at = done_at + 12_345
        for before, after in zip(slots_before, slots_after):
            a = assets[before["asset_id"]]
            assert frame_at(a, before["epoch"], sample_at) == frame_at(
                a, after["epoch"], sample_at
            )


class TestJournalRecovery:
    def test_restart_restores_tower(self, tmp_path, scenario_catalog):
        journal = str(tmp_path / "tower.jsonl")
        engine = Orchestrator(
            EngineConfig(), scenario_catalog, seed=7, journal_path=journal,
            now=0, wall_clock=wall(),
        )
        kiosk = Peer(engine, "kiosk")
        display = Peer(engine, "display")
        run_full_session(engine, kiosk, display)
        before = [(e.asset_id, e.page_id) for e in engine.tower.slots]

        reborn = Orchestrator(
            EngineConfig(), scenario_catalog, seed=99, journal_path=journal,
            now=500_000, wall_clock=wall(),
        )
        after = [(e.asset_id, e.page_id) for e in reborn.tower.slots]
        assert after == before
        assert all(e.epoch == 500_000 for e in reborn.tower.slots)
