"""Build the bundled sample catalogs.

Writes data/sample_manifest.json (84 diary pages with mixed frame rates,
the scale of the real archive selection) and data/scenario_catalog.json
(a small all-25fps catalog whose frame arithmetic is easy to follow in
simulator scenarios). Both are deterministic: run it twice, get identical
bytes.
"""

import json
import random
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

ACTIVITIES = [
    "Rehepeks", "Heinategu", "Leivategu", "Kalapüük", "Linakitkumine",
    "Karjaskäik", "Viljalõikus", "Saunaskäik", "Õlletegu", "Kangakudumine",
    "Jaanituli", "Turbalõikus", "Mesilastepidamine", "Küünlavalamine",
]
PLACES = [
    "Võrumaal", "Saaremaal", "Mulgimaal", "Setomaal", "Harjumaal", "Pärnumaal",
]


def make_page(i: int, rng: random.Random) -> dict:
    fps = [25, 25, 24, 30, 25, 25][i % 6]
    if fps == 25:
        frame_count = rng.randrange(20 * fps, 160 * fps + 1)
    else:
        # whole seconds keep fps x duration integral at 24/30 fps
        frame_count = fps * rng.randrange(20, 161)
    duration_s = frame_count / fps

    first = rng.getrandbits(64)
    flips = rng.randrange(0, 9)  # seam distance 0..8, inside the threshold
    last = first
    for _ in range(flips):
        last ^= 1 << rng.randrange(64)

    return {
        "page_id": f"p{i:03d}",
        "title": f"{ACTIVITIES[i % len(ACTIVITIES)]} {PLACES[i % len(PLACES)]}, {1890 + i % 40}",
        "muis_id": f"ERM-{800 + i // 10}:{i:03d}",
        "image_ref": f"pages/p{i:03d}.jpg",
        "locale": "en" if i % 6 == 5 else "et",
        "video": {
            "file": f"videos/p{i:03d}.mp4",
            "fps": fps,
            "frame_count": frame_count,
            "duration_s": duration_s,
            "model": "gen4" if i % 9 == 4 else "gen3",
            "first_frame_digest": f"{first:016x}",
            "last_frame_digest": f"{last:016x}",
        },
    }


def build_sample_manifest() -> dict:
    rng = random.Random(8484)
    pages = [make_page(i, rng) for i in range(1, 85)]
    # A couple of loops whose frame total is not a whole multiple of the
    # frame rate: still valid assets, but they never wrap exactly. p014
    # runs at 24 fps, p021 at 30 fps.
    for index, frames in ((13, 24 * 41 + 1), (20, 30 * 33 + 1)):
        video = pages[index]["video"]
        assert video["fps"] in (24, 30)
        video["frame_count"] = frames
        video["duration_s"] = frames / video["fps"]
    return {"version": 1, "pages": pages}


def build_scenario_catalog() -> dict:
    rng = random.Random(2525)
    pages = []
    for i in range(1, 9):
        page = make_page(i, rng)
        page["video"]["fps"] = 25
        page["video"]["frame_count"] = 500 + 125 * (i - 1)  # 20 s .. 55 s
        page["video"]["duration_s"] = page["video"]["frame_count"] / 25
        pages.append(page)
    return {"version": 1, "pages": pages}


def main() -> None:
    DATA_DIR.mkdir(exist_ok=True)
    for name, doc in (
        ("sample_manifest.json", build_sample_manifest()),
        ("scenario_catalog.json", build_scenario_catalog()),
    ):
        path = DATA_DIR / name
        path.write_text(json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        print(f"wrote {path} ({len(doc['pages'])} pages)")


if __name__ == "__main__":
    main()
