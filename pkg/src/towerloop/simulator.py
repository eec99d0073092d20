"""Headless display/kiosk simulator driving the engine over virtual time.

The simulator stands in for the real display computer and kiosk: it speaks
the wire protocol against an in-process orchestrator, renders nothing, and
advances a virtual millisecond clock instead of sleeping. Scenario scripts
describe visitor behaviour plus injected faults (clock skew, message loss);
the run produces a fully deterministic report of transitions, traffic, and
invariant violations, suitable for golden-file comparison.

The simulated display is honest: it recomputes word-fall timing from the
animation message itself and reports frame positions from its own (possibly
skewed) clock, so a disagreement with the server is detected rather than
papered over.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .catalog import Catalog
from .config import EngineConfig
from .errors import EngineError, SchemaViolation, ScriptInvalid
from .orchestrator import HEARTBEAT_INTERVAL_MS, Orchestrator
from .protocol import DISPLAY, KIOSK, make_message, validate_message
from .scheduler import VideoAsset, estimate_clock_offset, frame_at, median_offset
from .transcript import FallParams, TranscriptWord, schedule_word_fall

_ACTIONS = {
    "connect": {"role"},
    "press_start": set(),
    "speak": {"words", "locale"},
    "press_stop": set(),
    "advance_clock": {"ms"},
    "skew_display_clock": {"ms"},
    "drop_messages": {"count"},
    "sample_frames": set(),
}


@dataclass(frozen=True)
class ScenarioStep:
    at: int
    action: str
    params: dict


@dataclass(frozen=True)
class ScenarioScript:
    steps: tuple[ScenarioStep, ...]

    def horizon(self) -> int:
        h = 0
        for step in self.steps:
            h = max(h, step.at)
            if step.action == "advance_clock":
                h = max(h, step.at + step.params["ms"])
        return h


def parse_script(raw: dict) -> ScenarioScript:
    if not isinstance(raw, dict) or not isinstance(raw.get("steps"), list):
        raise ScriptInvalid("script must be an object with a steps list")
    steps = []
    last_at = 0
    for index, entry in enumerate(raw["steps"]):
        if not isinstance(entry, dict):
            raise ScriptInvalid(f"step {index}: must be an object")
        at = entry.get("at")
        action = entry.get("action")
        if not isinstance(at, int) or at < 0:
            raise ScriptInvalid(f"step {index}: at must be a non-negative integer")
        if at < last_at:
            raise ScriptInvalid(f"step {index}: at values must be non-decreasing")
        last_at = at
        if action not in _ACTIONS:
            raise ScriptInvalid(f"step {index}: unknown action {action!r}")
        params = {k: v for k, v in entry.items() if k not in ("at", "action")}
        missing = _ACTIONS[action] - set(params)
        if missing:
            raise ScriptInvalid(f"step {index}: {action} missing {sorted(missing)}")
        if action == "connect" and params["role"] not in (KIOSK, DISPLAY):
            raise ScriptInvalid(f"step {index}: connect role must be kiosk or display")
        if action == "speak":
            if not isinstance(params["words"], list) or not all(
                isinstance(w, str) for w in params["words"]
            ):
                raise ScriptInvalid(f"step {index}: speak words must be a list of strings")
        if action in ("advance_clock", "skew_display_clock") and not isinstance(
            params["ms"], int
        ):
            raise ScriptInvalid(f"step {index}: ms must be an integer")
        if action == "advance_clock" and params["ms"] < 0:
            raise ScriptInvalid(f"step {index}: advance_clock ms must be non-negative")
        if action == "drop_messages" and (
            not isinstance(params["count"], int) or params["count"] <= 0
        ):
            raise ScriptInvalid(f"step {index}: drop_messages count must be positive")
        steps.append(ScenarioStep(at=at, action=action, params=params))
    return ScenarioScript(steps=tuple(steps))


def load_scenario(path: str | Path) -> ScenarioScript:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ScriptInvalid(f"scenario {path}: {exc}") from exc
    return parse_script(raw)


@dataclass
class SimReport:
    seed: int
    horizon_ms: int
    transitions: list = field(default_factory=list)
    messages: list = field(default_factory=list)
    tower_timeline: list = field(default_factory=list)
    frames_sampled: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    final_phase: str = ""
    final_tower: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "horizon_ms": self.horizon_ms,
            "transitions": self.transitions,
            "messages": self.messages,
            "tower_timeline": self.tower_timeline,
            "frames_sampled": self.frames_sampled,
            "violations": self.violations,
            "final_phase": self.final_phase,
            "final_tower": self.final_tower,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @property
    def ok(self) -> bool:
        return not self.violations


class _SimClient:
    """Common scaffolding for the scripted kiosk and display peers."""

    role = ""

    def __init__(self, sim: "Simulation"):
        self.sim = sim
        self.connected = False
        self._seq = 0
        self._expect_server_seq = 0
        self._pending_t1: int | None = None

    def next_seq(self) -> int:
        value = self._seq
        self._seq += 1
        return value

    def local_now(self, now: int) -> int:
        return now

    def connect(self, now: int) -> None:
        hello = make_message("hello", self.next_seq(), self.local_now(now), {"role": self.role})
        self.connected = True
        self.sim.client_hello(self.role, hello, now)

    def send(self, msg_type: str, body: dict, now: int) -> None:
        msg = make_message(msg_type, self.next_seq(), self.local_now(now), body)
        self.sim.client_send(self.role, msg, now)

    def check_server_seq(self, msg: dict, now: int) -> bool:
        """Returns True if a gap was detected (messages were lost)."""
        expected = self._expect_server_seq
        self._expect_server_seq = msg["seq"] + 1
        return msg["seq"] > expected

    def on_message(self, msg: dict, now: int) -> None:
        raise NotImplementedError

    def heartbeat(self, now: int) -> None:
        self._pending_t1 = self.local_now(now)
        self.send("tick.sync", self.heartbeat_body(now), now)

    def heartbeat_body(self, now: int) -> dict:
        return {"t1": self.local_now(now)}

    def on_tick_reply(self, body: dict, now: int) -> None:
        pass


class SimKiosk(_SimClient):
    role = KIOSK

    def __init__(self, sim: "Simulation"):
        super().__init__(sim)
        self.page: dict | None = None
        self.capturing = False

    def on_message(self, msg: dict, now: int) -> None:
        body = msg["body"]
        if msg["type"] == "page.present":
            self.page = body
        elif msg["type"] == "capture.begin":
            self.capturing = True
        elif msg["type"] == "capture.end":
            self.capturing = False
        elif msg["type"] == "tick.sync":
            self.on_tick_reply(body, now)
        elif msg["type"] == "snapshot":
            self.page = body["page"]

    def press_start(self, now: int) -> None:
        self.send("session.start", {}, now)

    def speak(self, words: list[str], locale: str, now: int) -> None:
        self.send("transcript.final", {"text": " ".join(words), "locale": locale}, now)

    def press_stop(self, now: int) -> None:
        self.send("session.stop", {}, now)


class SimDisplay(_SimClient):
    """Virtual six-screen tower: no pixels, just schedules and clocks."""

    role = DISPLAY

    def __init__(self, sim: "Simulation", assets: dict[str, VideoAsset], fall_params: FallParams):
        super().__init__(sim)
        self.assets = assets
        self.fall_params = fall_params
        self.skew_ms = 0
        self.slots: list[dict] = []
        self.offset_estimates: list[float] = []
        self.drop_remaining = 0
        self._anim_t0: int | None = None

    def local_now(self, now: int) -> int:
        return now + self.skew_ms

    def on_message(self, msg: dict, now: int) -> None:
        if self.check_server_seq(msg, now):
            # Lost traffic: fall back to a full snapshot rather than guess.
            self.send("snapshot.request", {}, now)
        body = msg["body"]
        if msg["type"] == "anim.wordfall":
            self._start_wordfall(body, now)
        elif msg["type"] == "tower.update":
            self.slots = list(body["slots"])
            self.sim.note_tower_update(body, now)
        elif msg["type"] == "snapshot":
            self.slots = list(body["tower"]["slots"])
            if body["wordfall"] and body["wordfall"]["t0"] != self._anim_t0:
                self._start_wordfall(body["wordfall"], now, from_snapshot=True)
        elif msg["type"] == "tick.sync":
            self.on_tick_reply(body, now)

    def _start_wordfall(self, body: dict, now: int, from_snapshot: bool = False) -> None:
        # Recompute the schedule from the raw word list; trusting the
        # server's totals blindly would defeat the cross-check.
        words = [TranscriptWord(text=e["text"], seq=e["seq"]) for e in body["entries"]]
        timeline = schedule_word_fall(words, self.fall_params, t0=body["t0"])
        for name in ("dissolve_start", "dissolve_end"):
            if body.get(name) is not None and body[name] != getattr(timeline, name):
                self.sim.violation(
                    "wordfall_timing_mismatch",
                    now,
                    f"server {name}={body[name]} but recomputed {getattr(timeline, name)}",
                )
        self._anim_t0 = timeline.t0
        if from_snapshot:
            # Recovered mid-fall: t0 is server time, translate via the
            # estimated clock offset (server minus local).
            done_local = timeline.t0 + timeline.dissolve_end - round(self.current_offset())
            done_local = max(done_local, self.local_now(now))
        else:
            # Delivered at the instant the fall started.
            done_local = self.local_now(now) + timeline.dissolve_end
        self.sim.schedule_local(self, done_local, lambda t: self._finish_wordfall(timeline.t0, t))

    def _finish_wordfall(self, t0: int, now: int) -> None:
        if self._anim_t0 != t0:
            return  # superseded by a newer word fall
        self._anim_t0 = None
        self.send("anim.done", {"t0": t0, "completed_at": self.local_now(now)}, now)

    def sample_frames(self, now: int) -> list[dict]:
        frames = []
        for screen, slot in enumerate(self.slots):
            asset = self.assets[slot["asset_id"]]
            local = max(self.local_now(now), slot["epoch"])
            frames.append(
                {
                    "screen": screen,
                    "frame": frame_at(asset, slot["epoch"], local),
                    "at": self.local_now(now),
                }
            )
        return frames

    def heartbeat_body(self, now: int) -> dict:
        body = {"t1": self.local_now(now)}
        frames = self.sample_frames(now)
        if frames:
            body["frames"] = frames
            self.sim.note_frames(frames, now)
        return body

    def on_tick_reply(self, body: dict, now: int) -> None:
        if body.get("t2") is None or body.get("t3") is None:
            return
        offset, _rtt = estimate_clock_offset(body["t1"], body["t2"], body["t3"], self.local_now(now))
        self.offset_estimates = (self.offset_estimates + [offset])[-5:]

    def current_offset(self) -> float:
        return median_offset(self.offset_estimates)


class Simulation:
    """One scenario run: virtual clock, event queue, wired-up peers."""

    def __init__(
        self,
        script: ScenarioScript,
        config: EngineConfig,
        catalog: Catalog,
        seed: int,
        journal_path: str | None = None,
    ):
        self.script = script
        self.config = config
        self.now = 0
        self.horizon = script.horizon()
        self.report = SimReport(seed=seed, horizon_ms=self.horizon)
        self._queue: list[tuple[int, int, Callable[[int], None]]] = []
        self._order = 0
        self._sync_seen = 0

        self.engine = Orchestrator(
            config,
            catalog,
            seed=seed,
            journal_path=journal_path,
            now=0,
            wall_clock=self._wall_clock,
        )
        fall_params = FallParams(
            stagger_ms=config.word_stagger_ms,
            fall_ms=config.word_fall_ms,
            dissolve_ms=config.dissolve_ms,
            columns=config.fall_columns,
        )
        self.kiosk = SimKiosk(self)
        self.display = SimDisplay(self, catalog.assets(), fall_params)
        self._clients = {KIOSK: self.kiosk, DISPLAY: self.display}

    # -- deterministic wall clock for journal records --

    def _wall_clock(self) -> str:
        seconds, ms = divmod(self.now, 1000)
        minutes, seconds = divmod(seconds, 60)
        hours, minutes = divmod(minutes, 60)
        return f"2025-01-01T{hours:02d}:{minutes:02d}:{seconds:02d}.{ms:03d}+00:00"

    # -- event queue --

    def schedule(self, at: int, fn: Callable[[int], None]) -> None:
        if at > self.horizon:
            return
        heapq.heappush(self._queue, (max(at, self.now), self._order, fn))
        self._order += 1

    def schedule_local(self, client: SimDisplay, local_at: int, fn: Callable[[int], None]) -> None:
        """Schedule on the display's own clock; fires at local_at - skew."""
        self.schedule(local_at - client.skew_ms, fn)

    # -- logging --

    def log_message(self, direction: str, role: str, msg: dict, now: int, dropped: bool = False) -> None:
        entry = {
            "at": now,
            "dir": direction,
            "role": role,
            "type": msg["type"],
            "seq": msg["seq"],
        }
        if dropped:
            entry["dropped"] = True
        self.report.messages.append(entry)

    def violation(self, invariant: str, at: int, details: str) -> None:
        self.report.violations.append({"invariant": invariant, "at": at, "details": details})

    def note_tower_update(self, body: dict, now: int) -> None:
        self.report.tower_timeline.append(dict(body, at=now))
        slots = body["slots"]
        stamps = [s["contributed_at"] for s in slots]
        if any(above >= below for above, below in zip(stamps[1:], stamps)):
            self.violation("tower_order", now, f"contributions not newest-first: {stamps}")
        revealed = body.get("revealed_page_id")
        if revealed and slots and slots[0]["page_id"] != revealed:
            self.violation(
                "tower_order", now, f"revealed page {revealed} is not in the bottom slot"
            )

    def note_frames(self, frames: list[dict], now: int) -> None:
        for item in frames:
            self.report.frames_sampled.append(
                {"at": now, "screen": item["screen"], "frame": item["frame"]}
            )

    # -- traffic --

    def client_hello(self, role: str, hello: dict, now: int) -> None:
        self.log_message("c2s", role, hello, now)
        try:
            replies = self.engine.connect(role, hello, now)
        except EngineError as exc:
            self.violation("connect_rejected", now, str(exc))
            return
        self._after_engine(replies, now)

    def client_send(self, role: str, msg: dict, now: int) -> None:
        self.log_message("c2s", role, msg, now)
        try:
            replies = self.engine.handle_message(role, msg, now)
        except EngineError as exc:
            self.violation("message_rejected", now, f"{msg['type']}: {exc}")
            return
        self._after_engine(replies, now)

    def _after_engine(self, outbound: list, now: int) -> None:
        self._collect_sync_violations(now)
        self._schedule_deadline()
        for target, msg in outbound:
            self.deliver(target, msg, now)

    def deliver(self, target: str, msg: dict, now: int) -> None:
        client = self._clients.get(target)
        if client is None or not client.connected:
            return
        if isinstance(client, SimDisplay) and client.drop_remaining > 0:
            client.drop_remaining -= 1
            self.log_message("s2c", target, msg, now, dropped=True)
            return
        self.log_message("s2c", target, msg, now)
        try:
            validate_message(msg)
        except SchemaViolation as exc:
            self.violation("outbound_schema", now, f"{msg.get('type')}: {exc}")
            return
        client.on_message(msg, now)

    def _collect_sync_violations(self, now: int) -> None:
        new = self.engine.sync_reports[self._sync_seen:]
        self._sync_seen = len(self.engine.sync_reports)
        for report in new:
            for entry in report.flagged:
                self.violation(
                    "frame_sync",
                    now,
                    f"screen {entry.screen} drift {entry.drift} frames "
                    f"(reported {entry.reported}, expected {entry.expected})",
                )

    def _schedule_deadline(self) -> None:
        deadline = self.engine.next_deadline()
        if deadline is not None:
            self.schedule(deadline, self._engine_tick)

    def _engine_tick(self, now: int) -> None:
        self._after_engine(self.engine.tick(now), now)

    # -- recurring jobs --

    def _client_heartbeat(self, client: _SimClient) -> Callable[[int], None]:
        def fire(now: int) -> None:
            if client.connected:
                client.heartbeat(now)
                self._schedule_heartbeat(client, now, fire)

        return fire

    def _schedule_heartbeat(self, client: _SimClient, now: int, fire: Callable[[int], None]) -> None:
        if isinstance(client, SimDisplay):
            self.schedule_local(client, client.local_now(now) + HEARTBEAT_INTERVAL_MS, fire)
        else:
            self.schedule(now + HEARTBEAT_INTERVAL_MS, fire)

    # -- script execution --

    def _run_step(self, step: ScenarioStep) -> Callable[[int], None]:
        def fire(now: int) -> None:
            action, params = step.action, step.params
            if action == "connect":
                client = self._clients[params["role"]]
                client.connect(now)
                self._schedule_heartbeat(client, now, self._client_heartbeat(client))
            elif action == "press_start":
                self.kiosk.press_start(now)
            elif action == "speak":
                self.kiosk.speak(params["words"], params["locale"], now)
            elif action == "press_stop":
                self.kiosk.press_stop(now)
            elif action == "advance_clock":
                pass  # only extends the horizon; internal events fill the time
            elif action == "skew_display_clock":
                self.display.skew_ms += params["ms"]
            elif action == "drop_messages":
                self.display.drop_remaining += params["count"]
            elif action == "sample_frames":
                if self.display.connected:
                    self.display.heartbeat(now)

        return fire

    def run(self) -> SimReport:
        for step in self.script.steps:
            self.schedule(step.at, self._run_step(step))
        # Housekeeping cadence: drives timeout evaluation and liveness
        # alerts; exact timer deadlines get their own queue entries.
        for at in range(0, self.horizon + 1, 1000):
            self.schedule(at, self._engine_tick)
        while self._queue:
            at, _, fn = heapq.heappop(self._queue)
            self.now = at
            fn(at)

        self.report.transitions = [[phase, at] for phase, at in self.engine.transitions]
        self.report.final_phase = self.engine.state.phase.value
        self.report.final_tower = [e.asset_id for e in self.engine.tower.slots]
        return self.report


def run_scenario(
    script: ScenarioScript,
    config: EngineConfig,
    catalog: Catalog,
    seed: int,
    journal_path: str | None = None,
) -> SimReport:
    """Execute one scenario deterministically and return its report."""
    return Simulation(script, config, catalog, seed, journal_path=journal_path).run()
