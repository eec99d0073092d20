import json
from pathlib import Path

import pytest

from towerloop.catalog import load_catalog
from towerloop.config import EngineConfig

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

SAMPLE_MANIFEST = DATA_DIR / "sample_manifest.json"
SCENARIO_CATALOG = DATA_DIR / "scenario_catalog.json"
SCENARIO_DIR = DATA_DIR / "scenarios"


def make_video(
    fps=25,
    frame_count=500,
    duration_s=20.0,
    model="gen3",
    first="00000000000000ff",
    last="00000000000000ff",
    file="videos/x.mp4",
):
    return {
        "file": file,
        "fps": fps,
        "frame_count": frame_count,
        "duration_s": duration_s,
        "model": model,
        "first_frame_digest": first,
        "last_frame_digest": last,
    }


def make_page(page_id, locale="et", muis_id=None, video=None, title=None):
    return {
        "page_id": page_id,
        "title": title or f"Page {page_id}",
        "muis_id": muis_id or f"ERM-1:{page_id}",
        "image_ref": f"pages/{page_id}.jpg",
        "locale": locale,
        "video": video or make_video(file=f"videos/{page_id}.mp4"),
    }


def write_manifest(tmp_path, pages, version=1, name="manifest.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"version": version, "pages": pages}), encoding="utf-8")
    return path


@pytest.fixture
def tiny_catalog(tmp_path):
    pages = [make_page(f"p{i}") for i in range(1, 4)]
    return load_catalog(write_manifest(tmp_path, pages))


@pytest.fixture
def sample_catalog():
    return load_catalog(SAMPLE_MANIFEST)


@pytest.fixture
def scenario_catalog():
    return load_catalog(SCENARIO_CATALOG)


@pytest.fixture
def config():
    return EngineConfig()
