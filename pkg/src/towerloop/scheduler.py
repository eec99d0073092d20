"""Six-slot tower playlist and frame-accurate seamless-loop scheduling.

Everything here works on a monotonic millisecond timeline owned by the
server. Frame positions are computed with exact rational arithmetic so a
loop whose frame count matches fps x duration wraps to frame 0 with no
floating-point drift, ever.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import NegativeInterval, TimeBeforeEpoch, UnknownSlot

DURATION_MIN_S = 20.0
DURATION_MAX_S = 160.0

LOOP_MODELS = ("gen3", "gen4")


def _as_fraction(value: int | float | Fraction) -> Fraction:
    """Exact rational from a JSON number, honouring its decimal spelling."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value))


@dataclass(frozen=True)
class VideoAsset:
    """A pre-generated seamless-loop clip, described by manifest metadata.

    first/last frame digests are 64-bit perceptual hashes computed offline;
    their Hamming distance is the proxy for loop-seam visibility.
    """
    asset_id: str
    page_id: str
    fps: Fraction
    frame_count: int
    duration_s: float
    model: str
    first_frame_digest: int
    last_frame_digest: int
    file_ref: str

    @property
    def duration_ms(self) -> int:
        return round(self.duration_s * 1000)

    def seam_distance(self) -> int:
        return hamming_distance(self.first_frame_digest, self.last_frame_digest)


def hamming_distance(a: int, b: int) -> int:
    return (a ^ b).bit_count()


def validate_loop_asset(asset: VideoAsset, loop_threshold: int) -> list[str]:
    """Check a loop asset against playback invariants.

    Returns a list of human-readable violations; an empty list means the
    asset is valid. Never raises: curators fix reports, not tracebacks.
    """
    violations: list[str] = []
    if asset.fps <= 0:
        violations.append(f"fps {asset.fps} is not positive")
    if asset.frame_count <= 0:
        violations.append(f"frame count {asset.frame_count} is not positive")
    if asset.duration_s < DURATION_MIN_S:
        violations.append(f"duration {asset.duration_s} s below {DURATION_MIN_S:g} s")
    elif asset.duration_s > DURATION_MAX_S:
        violations.append(f"duration {asset.duration_s} s above {DURATION_MAX_S:g} s")
    if asset.fps > 0:
        drift = abs(asset.frame_count - asset.fps * _as_fraction(asset.duration_s))
        if drift >= 1:
            violations.append(
                f"frame count {asset.frame_count} inconsistent with "
                f"{asset.fps} fps x {asset.duration_s} s"
            )
    if asset.model not in LOOP_MODELS:
        violations.append(f"unknown model tag {asset.model!r}")
    for name, digest in (
        ("first_frame_digest", asset.first_frame_digest),
        ("last_frame_digest", asset.last_frame_digest),
    ):
        if not 0 <= digest < 1 << 64:
            violations.append(f"{name} does not fit in 64 bits")
    seam = asset.seam_distance()
    if seam > loop_threshold:
        violations.append(f"loop seam distance {seam} > {loop_threshold}")
    return violations


# --- frame arithmetic --------------------------------------------------------

def frame_at(asset: VideoAsset, epoch: int, t: int) -> int:
    """Frame index shown at monotonic time t for a loop started at epoch."""
    if t < epoch:
        raise TimeBeforeEpoch(f"t={t} precedes epoch={epoch}")
    elapsed = t - epoch
    frames = int(elapsed * _as_fraction(asset.fps) / 1000)  # floor: operands >= 0
    return frames % asset.frame_count


def circular_frame_distance(a: int, b: int, frame_count: int) -> int:
    """Wrap-aware distance between two frame indices on the same loop."""
    if not (0 <= a < frame_count and 0 <= b < frame_count):
        raise ValueError(
            f"frame indices {a}, {b} out of range for frame_count {frame_count}"
        )
    d = abs(a - b)
    return min(d, frame_count - d)


# --- NTP-style clock offset --------------------------------------------------

def estimate_clock_offset(t1: int, t2: int, t3: int, t4: int) -> tuple[float, float]:
    """Estimate (offset, round_trip) from one request/response exchange.

    t1: client send, t2: server receive, t3: server send, t4: client receive.
    offset is how far the server clock is ahead of the client clock; exact
    when the two network legs have equal delay.
    """
    if t4 < t1:
        raise NegativeInterval(f"client interval negative: t4={t4} < t1={t1}")
    if t3 < t2:
        raise NegativeInterval(f"server interval negative: t3={t3} < t2={t2}")
    offset = ((t2 - t1) + (t3 - t4)) / 2
    round_trip = (t4 - t1) - (t3 - t2)
    return offset, round_trip


def median_offset(estimates: list[float]) -> float:
    """Offset applied by a display node: median of its recent estimates."""
    if not estimates:
        return 0.0
    ordered = sorted(estimates)
    n = len(ordered)
    mid = n // 2
    if n % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2


# --- tower playlist ----------------------------------------------------------

@dataclass(frozen=True)
class TowerEntry:
    asset_id: str
    page_id: str
    epoch: int             # monotonic ms at which this slot's loop (re)started
    contributed_at: str    # wall clock, ISO-8601

    def to_dict(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "page_id": self.page_id,
            "epoch": self.epoch,
            "contributed_at": self.contributed_at,
        }


@dataclass(frozen=True)
class TowerState:
    """Rolling playlist of the most recent contributions.

    Slot 0 is the bottom screen and always holds the newest entry; pushes
    shift everything up one screen and evict off the top.
    """
    capacity: int = 6
    slots: tuple[TowerEntry, ...] = ()

    def __post_init__(self) -> None:
        if self.capacity <= 0:
            raise ValueError("tower capacity must be positive")
        if len(self.slots) > self.capacity:
            raise ValueError("tower holds more entries than its capacity")

    def occupied(self) -> int:
        return len(self.slots)

    def entry(self, slot: int) -> TowerEntry:
        if not 0 <= slot < len(self.slots):
            raise UnknownSlot(f"slot {slot} is not occupied")
        return self.slots[slot]


def push_video(
    tower: TowerState, asset: VideoAsset, now: int, contributed_at: str = ""
) -> tuple[TowerState, TowerEntry | None]:
    """Insert a new contribution at the bottom slot.

    Existing entries shift up one slot and keep their epochs, so their loops
    play on uninterrupted; only the new entry starts its loop at `now`. The
    entry pushed past the top is evicted and returned.
    """
    entry = TowerEntry(
        asset_id=asset.asset_id,
        page_id=asset.page_id,
        epoch=now,
        contributed_at=contributed_at,
    )
    slots = (entry,) + tower.slots
    evicted = None
    if len(slots) > tower.capacity:
        evicted = slots[-1]
        slots = slots[: tower.capacity]
    return replace(tower, slots=slots), evicted


@dataclass(frozen=True)
class FramePointer:
    """One screen's reported playback position at a given instant."""
    screen: int
    frame: int
    at: int

    def to_dict(self) -> dict:
        return {"screen": self.screen, "frame": self.frame, "at": self.at}


@dataclass(frozen=True)
class ScreenDrift:
    screen: int
    reported: int
    expected: int
    drift: int
    flagged: bool

    def to_dict(self) -> dict:
        return {
            "screen": self.screen,
            "reported": self.reported,
            "expected": self.expected,
            "drift": self.drift,
            "flagged": self.flagged,
        }


@dataclass(frozen=True)
class SyncReport:
    entries: tuple[ScreenDrift, ...]

    @property
    def flagged(self) -> tuple[ScreenDrift, ...]:
        return tuple(e for e in self.entries if e.flagged)

    @property
    def in_sync(self) -> bool:
        return not self.flagged

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}


def sync_check(
    tower: TowerState,
    assets: dict[str, VideoAsset],
    reports: list[FramePointer],
    tolerance_frames: int,
) -> SyncReport:
    """Compare reported frame positions against the schedule.

    Drift is measured with the circular distance so a report of the last
    frame while the schedule says frame 0 counts as one frame, not a full
    loop. Screens whose drift exceeds the tolerance are flagged.
    """
    entries = []
    for report in reports:
        slot = tower.entry(report.screen)
        asset = assets[slot.asset_id]
        expected = frame_at(asset, slot.epoch, report.at)
        drift = circular_frame_distance(report.frame, expected, asset.frame_count)
        entries.append(
            ScreenDrift(
                screen=report.screen,
                reported=report.frame,
                expected=expected,
                drift=drift,
                flagged=drift > tolerance_frames,
            )
        )
    return SyncReport(entries=tuple(entries))
