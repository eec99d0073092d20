"""towerloop: orchestration engine for a read-aloud kiosk driving a
six-screen tower of seamlessly looping videos.

Visitors read archival diary pages aloud at a kiosk; their words fall and
dissolve on screen, revealing the page's looping video at the bottom of the
tower. The engine keeps every screen frame-synchronized, survives restarts
via an append-only journal, and is testable end to end under a simulated
display with virtual time.
"""

from .catalog import (
    Catalog,
    DiaryPage,
    SelectionHistory,
    archive_link,
    load_catalog,
    select_next_page,
)
from .config import EngineConfig, load_config
from .orchestrator import Orchestrator
from .scheduler import (
    FramePointer,
    TowerEntry,
    TowerState,
    VideoAsset,
    circular_frame_distance,
    estimate_clock_offset,
    frame_at,
    push_video,
    sync_check,
    validate_loop_asset,
)
from .session import SessionMachine, SessionPhase, SessionState
from .simulator import ScenarioScript, SimReport, load_scenario, parse_script, run_scenario
from .transcript import FallParams, FallTimeline, TranscriptWord, schedule_word_fall, tokenize

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "DiaryPage",
    "EngineConfig",
    "FallParams",
    "FallTimeline",
    "FramePointer",
    "Orchestrator",
    "ScenarioScript",
    "SelectionHistory",
    "SessionMachine",
    "SessionPhase",
    "SessionState",
    "SimReport",
    "TowerEntry",
    "TowerState",
    "TranscriptWord",
    "VideoAsset",
    "archive_link",
    "circular_frame_distance",
    "estimate_clock_offset",
    "frame_at",
    "load_catalog",
    "load_config",
    "load_scenario",
    "parse_script",
    "push_video",
    "run_scenario",
    "schedule_word_fall",
    "select_next_page",
    "sync_check",
    "tokenize",
    "validate_loop_asset",
]
