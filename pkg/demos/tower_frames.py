"""Six-slot tower mechanics: pushes, evictions, frame-exact loop positions.

Run from the repository root:  python3 demos/tower_frames.py
"""

from pathlib import Path

from towerloop import (
    FramePointer,
    TowerState,
    frame_at,
    load_catalog,
    push_video,
    sync_check,
)

ROOT = Path(__file__).resolve().parent.parent
catalog = load_catalog(ROOT / "data/scenario_catalog.json")
assets = catalog.assets()

# Eight contributions into six screens: the two oldest fall off the top.
tower = TowerState(capacity=6)
for i, page in enumerate(catalog.pages):
    tower, evicted = push_video(tower, page.video, now=i * 30_000)
    note = f", evicted {evicted.asset_id}" if evicted else ""
    print(f"push {page.video.asset_id:<11} -> bottom slot{note}")

print("\ntower, bottom to top (epochs preserved across shifts):")
for slot, entry in enumerate(tower.slots):
    print(f"  slot {slot}: {entry.asset_id:<11} loop started at {entry.epoch:>7} ms")

# Every screen's frame position is pure arithmetic on the shared timeline.
t = 30_000 * 9
print(f"\nframe positions at t={t} ms:")
for slot, entry in enumerate(tower.slots):
    asset = assets[entry.asset_id]
    frame = frame_at(asset, entry.epoch, t)
    print(f"  screen {slot}: frame {frame:>4} / {asset.frame_count} ({asset.duration_s:g} s loop)")

# A sync check with one screen deliberately lagging two frames.
reports = []
for slot, entry in enumerate(tower.slots):
    asset = assets[entry.asset_id]
    frame = frame_at(asset, entry.epoch, t)
    if slot == 3:
        frame = (frame - 2) % asset.frame_count
    reports.append(FramePointer(screen=slot, frame=frame, at=t))

result = sync_check(tower, assets, reports, tolerance_frames=1)
print("\nsync check (tolerance 1 frame = 40 ms at 25 fps):")
for entry in result.entries:
    flag = "DRIFT" if entry.flagged else "ok"
    print(f"  screen {entry.screen}: reported {entry.reported}, expected {entry.expected} -> {flag}")
