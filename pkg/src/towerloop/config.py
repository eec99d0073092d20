"""Engine configuration: one flat JSON document, every key optional."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import MalformedManifest, MissingFile


@dataclass(frozen=True)
class EngineConfig:
    tower_capacity: int = 6
    reveal_timeout_ms: int = 60_000
    reading_timeout_ms: int = 120_000
    word_stagger_ms: int = 250
    word_fall_ms: int = 1_500
    dissolve_ms: int = 2_000
    fall_columns: int = 8
    sync_tolerance_frames: int = 1
    loop_threshold_bits: int = 10
    selection_window: int = 5
    muis_base_url: str = "https://www.muis.ee/"
    locales: tuple[str, ...] = ("et", "en")

    def __post_init__(self) -> None:
        for name in (
            "tower_capacity",
            "reveal_timeout_ms",
            "reading_timeout_ms",
            "word_stagger_ms",
            "word_fall_ms",
            "dissolve_ms",
            "fall_columns",
            "selection_window",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"config key {name} must be positive")
        for name in ("sync_tolerance_frames", "loop_threshold_bits"):
            if getattr(self, name) < 0:
                raise ValueError(f"config key {name} must be non-negative")
        if not self.locales:
            raise ValueError("config key locales must be non-empty")

    def to_dict(self) -> dict:
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["locales"] = list(self.locales)
        return out


def load_config(path: str | Path) -> EngineConfig:
    """Read an engine config file, falling back to defaults for absent keys.

    Unknown keys are ignored so older engines tolerate newer files.
    """
    p = Path(path)
    if not p.is_file():
        raise MissingFile(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedManifest(f"config file {p}: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedManifest(f"config file {p}: top level must be an object")
    known = {f.name for f in fields(EngineConfig)}
    kwargs = {k: v for k, v in raw.items() if k in known}
    if "locales" in kwargs:
        if not isinstance(kwargs["locales"], list):
            raise MalformedManifest(f"config file {p}: locales must be a list")
        kwargs["locales"] = tuple(kwargs["locales"])
    try:
        return EngineConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise MalformedManifest(f"config file {p}: {exc}") from exc
