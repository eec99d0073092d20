"""Wire protocol: message envelope, per-type body schemas, role rules.

One JSON object per frame: {"type", "seq", "ts", "body"}. seq is strictly
increasing per connection, ts is the sender's monotonic clock. The type
set is closed; unknown body fields are ignored for forward compatibility,
and the same schemas validate inbound and outbound traffic.
"""

from __future__ import annotations

from typing import Any

from .errors import RoleViolation, SchemaViolation

KIOSK = "kiosk"
DISPLAY = "display"
ADMIN = "admin"
SERVER = "server"

ROLES = (KIOSK, DISPLAY, ADMIN)
EXCLUSIVE_ROLES = (KIOSK, DISPLAY)

# field name -> (allowed types, required)
_SCHEMAS: dict[str, dict[str, tuple[tuple[type, ...], bool]]] = {
    "hello": {"role": ((str,), True), "name": ((str,), False)},
    "capture.begin": {"locale": ((str,), True)},
    "capture.end": {},
    "session.start": {},
    "session.stop": {},
    "transcript.partial": {"text": ((str,), True), "locale": ((str,), False)},
    "transcript.final": {"text": ((str,), True), "locale": ((str,), False)},
    "page.present": {
        "page_id": ((str,), True),
        "title": ((str,), True),
        "image_url": ((str,), True),
        "locale": ((str,), True),
        "archive_url": ((str,), True),
        "qr_payload": ((str,), True),
    },
    "anim.wordfall": {
        "t0": ((int,), True),
        "entries": ((list,), True),
        "dissolve_ms": ((int,), True),
        "dissolve_start": ((int,), True),
        "dissolve_end": ((int,), True),
    },
    "anim.done": {"t0": ((int,), True), "completed_at": ((int,), True)},
    "tower.update": {
        "slots": ((list,), True),
        "revealed_page_id": ((str, type(None)), False),
        "evicted": ((dict, type(None)), False),
    },
    "tick.sync": {
        "t1": ((int,), True),
        "t2": ((int,), False),
        "t3": ((int,), False),
        "frames": ((list,), False),
    },
    "snapshot.request": {},
    "snapshot": {
        "phase": ((str,), True),
        "page": ((dict,), True),
        "tower": ((dict,), True),
        "connected": ((dict,), True),
        "alerts": ((list,), True),
        "server_now": ((int,), True),
    },
}

MESSAGE_TYPES = tuple(sorted(_SCHEMAS))

# Which message types each role may send.
_SENDABLE = {
    KIOSK: {"hello", "session.start", "session.stop", "transcript.partial",
            "transcript.final", "tick.sync", "snapshot.request"},
    DISPLAY: {"hello", "anim.done", "tick.sync", "snapshot.request"},
    ADMIN: {"hello", "tick.sync", "snapshot.request"},
    SERVER: {"capture.begin", "capture.end", "page.present", "anim.wordfall",
             "tower.update", "tick.sync", "snapshot"},
}


def make_message(msg_type: str, seq: int, ts: int, body: dict | None = None) -> dict:
    return {"type": msg_type, "seq": seq, "ts": ts, "body": body or {}}


def validate_message(obj: Any) -> dict:
    """Validate one wire frame; returns it unchanged if well-formed."""
    if not isinstance(obj, dict):
        raise SchemaViolation("message must be a JSON object")
    msg_type = obj.get("type")
    if msg_type not in _SCHEMAS:
        raise SchemaViolation(f"unknown message type {msg_type!r}")
    for key, kind in (("seq", int), ("ts", int)):
        if not isinstance(obj.get(key), kind) or isinstance(obj.get(key), bool):
            raise SchemaViolation(f"{msg_type}: {key} must be an integer")
    if obj["seq"] < 0:
        raise SchemaViolation(f"{msg_type}: seq must be non-negative")
    body = obj.get("body")
    if not isinstance(body, dict):
        raise SchemaViolation(f"{msg_type}: body must be an object")
    for name, (types, required) in _SCHEMAS[msg_type].items():
        if name not in body:
            if required:
                raise SchemaViolation(f"{msg_type}: body missing field {name!r}")
            continue
        value = body[name]
        if isinstance(value, bool) and bool not in types:
            raise SchemaViolation(f"{msg_type}: body field {name!r} has wrong type")
        if not isinstance(value, types):
            raise SchemaViolation(f"{msg_type}: body field {name!r} has wrong type")
    return obj


def check_role_may_send(role: str, msg_type: str) -> None:
    allowed = _SENDABLE.get(role)
    if allowed is None:
        raise RoleViolation(f"unknown role {role!r}")
    if msg_type not in allowed:
        raise RoleViolation(f"role {role!r} may not send {msg_type!r}")


class SeqTracker:
    """Enforces strictly increasing per-connection sequence numbers."""

    def __init__(self) -> None:
        self.last: int | None = None

    def check(self, seq: int) -> None:
        if self.last is not None and seq <= self.last:
            raise SchemaViolation(f"seq {seq} not greater than previous {self.last}")
        self.last = seq


class OutboundCounter:
    """Allocates the server's outgoing seq numbers, one stream per peer."""

    def __init__(self) -> None:
        self._next: dict[str, int] = {}

    def take(self, peer: str) -> int:
        value = self._next.get(peer, 0)
        self._next[peer] = value + 1
        return value

    def reset(self, peer: str) -> None:
        self._next.pop(peer, None)
