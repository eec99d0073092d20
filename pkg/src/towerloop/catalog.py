"""Diary-page catalog: manifest loading, page selection, archive links.

The manifest is one curator-edited JSON document. Validation is total:
a load either returns a fully valid catalog or raises with every problem
found, so a curator can fix a whole batch of mistakes in one round.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from urllib.parse import quote, urljoin

from .errors import (
    CatalogIssue,
    CatalogValidationError,
    EmptyCatalog,
    InvalidMuisId,
    MalformedManifest,
    MissingFile,
)
from .scheduler import VideoAsset, validate_loop_asset

MANIFEST_VERSION = 1

MUIS_OBJECT_PATH = "museaalview/"

_PAGE_FIELDS = {"page_id": str, "title": str, "muis_id": str, "image_ref": str, "locale": str}
_VIDEO_FIELDS = {
    "file": str,
    "fps": (int, float),
    "frame_count": int,
    "duration_s": (int, float),
    "model": str,
    "first_frame_digest": str,
    "last_frame_digest": str,
}


@dataclass(frozen=True)
class DiaryPage:
    page_id: str
    title: str
    muis_id: str
    image_ref: str
    locale: str
    video: VideoAsset


@dataclass(frozen=True)
class Catalog:
    pages: tuple[DiaryPage, ...]
    version: int
    source_path: str

    def __len__(self) -> int:
        return len(self.pages)

    def page(self, page_id: str) -> DiaryPage:
        for p in self.pages:
            if p.page_id == page_id:
                return p
        raise KeyError(page_id)

    def assets(self) -> dict[str, VideoAsset]:
        return {p.video.asset_id: p.video for p in self.pages}


@dataclass(frozen=True)
class SelectionHistory:
    """The last few presented pages, excluded from the next draw."""
    window: int = 5
    recent: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.window <= 0:
            raise ValueError("selection window must be positive")
        if len(self.recent) > self.window:
            raise ValueError("history longer than its window")


def _parse_digest(text: str) -> int:
    value = int(text, 16)
    if not 0 <= value < 1 << 64:
        raise ValueError("digest exceeds 64 bits")
    return value


def _check_fields(obj: dict, schema: dict, where: str) -> list[str]:
    problems = []
    for name, types in schema.items():
        if name not in obj:
            problems.append(f"{where}: missing field {name!r}")
        elif not isinstance(obj[name], types) or isinstance(obj[name], bool):
            problems.append(f"{where}: field {name!r} has wrong type")
        elif types is str and not obj[name]:
            problems.append(f"{where}: field {name!r} is empty")
    return problems


def _parse_page(
    raw: dict, index: int, locales: tuple[str, ...], loop_threshold: int
) -> tuple[DiaryPage | None, list[CatalogIssue]]:
    page_id = raw.get("page_id") if isinstance(raw.get("page_id"), str) else f"#{index}"
    issues: list[CatalogIssue] = []

    for problem in _check_fields(raw, _PAGE_FIELDS, "page"):
        issues.append(CatalogIssue("missing_field", page_id, problem))
    video = raw.get("video")
    if not isinstance(video, dict):
        issues.append(CatalogIssue("missing_field", page_id, "page: missing video object"))
        return None, issues
    for problem in _check_fields(video, _VIDEO_FIELDS, "video"):
        issues.append(CatalogIssue("missing_field", page_id, problem))
    if issues:
        return None, issues

    if raw["locale"] not in locales:
        issues.append(
            CatalogIssue("bad_locale", page_id, f"locale {raw['locale']!r} not in {list(locales)}")
        )
    try:
        first = _parse_digest(video["first_frame_digest"])
        last = _parse_digest(video["last_frame_digest"])
    except ValueError as exc:
        issues.append(CatalogIssue("bad_field", page_id, f"frame digest: {exc}"))
        return None, issues
    if issues:
        return None, issues

    fps = video["fps"]
    asset = VideoAsset(
        asset_id=f"{page_id}/video",
        page_id=page_id,
        fps=Fraction(fps) if isinstance(fps, int) else Fraction(str(fps)),
        frame_count=video["frame_count"],
        duration_s=float(video["duration_s"]),
        model=video["model"],
        first_frame_digest=first,
        last_frame_digest=last,
        file_ref=video["file"],
    )
    for violation in validate_loop_asset(asset, loop_threshold):
        issues.append(CatalogIssue("invalid_asset", page_id, violation))
    if issues:
        return None, issues

    page = DiaryPage(
        page_id=raw["page_id"],
        title=raw["title"],
        muis_id=raw["muis_id"],
        image_ref=raw["image_ref"],
        locale=raw["locale"],
        video=asset,
    )
    return page, []


def load_catalog(
    manifest_path: str | Path,
    locales: tuple[str, ...] = ("et", "en"),
    loop_threshold: int = 10,
    check_assets: bool = False,
) -> Catalog:
    """Load and fully validate a page manifest.

    All page-level problems are collected into one CatalogValidationError;
    parse failures and an unreadable file raise immediately. With
    check_assets=True, image and video paths must also exist on disk next
    to the manifest.
    """
    path = Path(manifest_path)
    if not path.is_file():
        raise MissingFile(f"manifest not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedManifest(
            f"manifest {path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    except OSError as exc:
        raise MissingFile(f"manifest {path}: {exc}") from exc

    if not isinstance(raw, dict):
        raise MalformedManifest(f"manifest {path}: top level must be an object")
    version = raw.get("version")
    if not isinstance(version, int):
        raise MalformedManifest(f"manifest {path}: missing integer version")
    pages_raw = raw.get("pages")
    if not isinstance(pages_raw, list):
        raise MalformedManifest(f"manifest {path}: pages must be a list")
    if not pages_raw:
        raise MalformedManifest(f"manifest {path}: empty catalog")

    pages: list[DiaryPage] = []
    issues: list[CatalogIssue] = []
    seen: set[str] = set()
    for index, entry in enumerate(pages_raw):
        if not isinstance(entry, dict):
            issues.append(CatalogIssue("bad_field", f"#{index}", "page entry must be an object"))
            continue
        page, page_issues = _parse_page(entry, index, locales, loop_threshold)
        issues.extend(page_issues)
        if page is None:
            continue
        if page.page_id in seen:
            issues.append(
                CatalogIssue("duplicate_page_id", page.page_id, "page_id appears more than once")
            )
            continue
        seen.add(page.page_id)
        if check_assets:
            for ref in (page.image_ref, page.video.file_ref):
                if not (path.parent / ref).is_file():
                    issues.append(
                        CatalogIssue("missing_asset_file", page.page_id, f"file not found: {ref}")
                    )
        pages.append(page)

    if issues:
        raise CatalogValidationError(issues)
    return Catalog(pages=tuple(pages), version=version, source_path=str(path))


def select_next_page(
    catalog: Catalog, history: SelectionHistory, rng: random.Random
) -> tuple[DiaryPage, SelectionHistory]:
    """Draw the next page to present, avoiding recently shown ones.

    Uniform over pages outside the history window; if the window covers the
    whole catalog, uniform over everything. Deterministic for a given RNG
    state. Returns the updated history with the chosen page appended.
    """
    if not catalog.pages:
        raise EmptyCatalog("cannot select from an empty catalog")
    excluded = set(history.recent)
    eligible = [p for p in catalog.pages if p.page_id not in excluded]
    if not eligible:
        eligible = list(catalog.pages)
    page = eligible[rng.randrange(len(eligible))]
    recent = (history.recent + (page.page_id,))[-history.window:]
    return page, replace(history, recent=recent)


def archive_link(page: DiaryPage, base_url: str = "https://www.muis.ee/") -> tuple[str, bytes]:
    """Build the public archive URL and its QR payload for a page.

    The payload is the URL's byte form, ready for QR encoding; rasterizing
    happens on the kiosk.
    """
    if not page.muis_id:
        raise InvalidMuisId(f"page {page.page_id!r} has an empty muis_id")
    try:
        escaped = quote(page.muis_id, safe="")
    except UnicodeError as exc:
        raise InvalidMuisId(f"page {page.page_id!r}: {exc}") from exc
    base = base_url if base_url.endswith("/") else base_url + "/"
    url = urljoin(base, MUIS_OBJECT_PATH) + escaped
    return url, url.encode("utf-8")
