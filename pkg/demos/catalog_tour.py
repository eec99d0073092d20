"""Walk the bundled archive catalog: loading, selection, archive links.

Run from the repository root:  python3 demos/catalog_tour.py
"""

import random
from pathlib import Path

from towerloop import SelectionHistory, archive_link, load_catalog, select_next_page

ROOT = Path(__file__).resolve().parent.parent

catalog = load_catalog(ROOT / "data/sample_manifest.json")
print(f"catalog: {len(catalog)} pages from {catalog.source_path}")

page = catalog.pages[0]
print(f"\nfirst page: {page.page_id} — {page.title!r} [{page.locale}]")
print(f"  video: {page.video.file_ref}, {page.video.duration_s:g} s @ {page.video.fps} fps")
print(f"  loop seam: {page.video.seam_distance()} differing digest bits")

url, qr_payload = archive_link(page)
print(f"  archive entry: {url}")
print(f"  QR payload ({len(qr_payload)} bytes): {qr_payload[:40]!r}...")

# Ten visitors in a row: the exclusion window keeps the rotation fresh.
print("\nten consecutive visitors (window of 5):")
rng = random.Random(2025)
history = SelectionHistory(window=5)
for visitor in range(1, 11):
    page, history = select_next_page(catalog, history, rng)
    print(f"  visitor {visitor:2d}: {page.page_id}  {page.title}")
print(f"\nrecent window now holds: {', '.join(history.recent)}")
