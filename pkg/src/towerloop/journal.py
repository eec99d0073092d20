"""Append-only tower journal: one JSON object per line.

The journal is the crash-recovery record for the tower playlist. On
startup the file is replayed and the most recent contributions (up to the
tower capacity) are restored in order; their loop epochs restart at boot
time, since the old monotonic timeline died with the old process.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class JournalRecord:
    ts: str          # wall clock, ISO-8601
    op: str          # "push" | "evict"
    asset_id: str
    page_id: str

    def to_dict(self) -> dict:
        return {"ts": self.ts, "op": self.op, "asset_id": self.asset_id, "page_id": self.page_id}


class TowerJournal:
    def __init__(self, path: str | Path):
        self.path = Path(path)

    def append(self, record: JournalRecord) -> None:
        with open(self.path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")

    def records(self) -> list[JournalRecord]:
        if not self.path.is_file():
            return []
        out = []
        with open(self.path, "r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                try:
                    raw = json.loads(line)
                    out.append(
                        JournalRecord(
                            ts=raw["ts"],
                            op=raw["op"],
                            asset_id=raw["asset_id"],
                            page_id=raw["page_id"],
                        )
                    )
                except (json.JSONDecodeError, KeyError, TypeError):
                    continue  # a torn tail write must not block recovery
        return out

    def replay(self, capacity: int) -> list[JournalRecord]:
        """Most recent pushes still on the tower, newest first.

        Eviction records are informational; the rolling-window semantics
        follow from the pushes alone.
        """
        pushes = [r for r in self.records() if r.op == "push"]
        recent = pushes[-capacity:]
        return list(reversed(recent))
