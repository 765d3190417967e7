import pytest

from plainalign import htmltext
from plainalign.corpus_model import load_document
from plainalign.errors import (
    ConfigurationError,
    ExtractionError,
    TransportError,
    ValidationError,
)
from plainalign.harvester import (
    Fetcher,
    FixtureTransport,
    SiteConfig,
    StartUrl,
    extract_text,
    fetch,
    harvest_site,
    load_site_configs,
    normalize_title,
    normalize_url,
    pair_documents,
    slugify_url,
)

from conftest import DATA_DIR

HARVEST_DIR = DATA_DIR / "harvest"


def simple_site(**overrides):
    defaults = dict(
        site_id="test",
        start_urls=(),
        content_selector="#content",
        remove_selectors=(".nav",),
        pairing_strategy="title_match",
        rate_limit_ms=100,
        license_tag="CC-BY-4.0",
    )
    defaults.update(overrides)
    return SiteConfig(**defaults)


class DictTransport:
    """In-memory transport; None values simulate network failure."""

    def __init__(self, pages):
        self.pages = pages
        self.calls = []

    def get(self, url):
        self.calls.append(url)
        entry = self.pages.get(url)
        if entry is None:
            raise TransportError(f"boom: {url}")
        return entry


class TestFetch:
    def test_fixture_body_returned_byte_exact(self):
        transport = FixtureTransport(HARVEST_DIR)
        record = fetch("https://bank.example/kredite.html", transport)
        expected = (HARVEST_DIR / "pages" / "bank_kredite.html").read_bytes()
        assert record.status == 200
        assert record.body == expected
        assert record.access_date == "2023-05-31"

    def test_unknown_fixture_url_fails_after_retries(self):
        transport = DictTransport({})
        with pytest.raises(TransportError, match="after retries"):
            fetch("https://missing.example/x", transport)
        assert len(transport.calls) == 3  # initial attempt plus two retries

    def test_non_200_is_returned_not_raised(self):
        transport = DictTransport({"https://a.example/gone": (404, b"not here")})
        record = fetch("https://a.example/gone", transport)
        assert record.status == 404

    def test_rate_limit_spaces_same_host_requests(self):
        clock = {"now": 0.0}
        sleeps = []

        def fake_clock():
            return clock["now"]

        def fake_sleep(seconds):
            sleeps.append(seconds)
            clock["now"] += seconds

        transport = DictTransport(
            {
                "https://a.example/1": (200, b"x"),
                "https://a.example/2": (200, b"y"),
                "https://b.example/3": (200, b"z"),
            }
        )
        fetcher = Fetcher(
            transport, rate_limit_ms=500, clock=fake_clock, sleep=fake_sleep
        )
        fetcher.fetch("https://a.example/1")
        fetcher.fetch("https://b.example/3")  # other host: no delay
        assert sleeps == []
        fetcher.fetch("https://a.example/2")
        assert len(sleeps) == 1
        assert sleeps[0] >= 0.5 - 1e-9

    def test_retry_succeeds_on_third_attempt(self):
        class Flaky:
            def __init__(self):
                self.n = 0

            def get(self, url):
                self.n += 1
                if self.n < 3:
                    raise TransportError("flaky")
                return 200, b"ok"

        record = fetch("https://a.example/x", Flaky())
        assert record.status == 200
        assert record.body == b"ok"


class TestExtract:
    NAV_PAGE = """
    <html><head><title>Seite Eins | Beispiel</title></head><body>
    <div class="nav"><a href="/other.html">Menü</a> Navigation hier</div>
    <div id="content">
      <p>Erster Absatz steht hier. Er hat zwei Sätze.</p>
      <p>Zweiter Absatz folgt.</p>
    </div>
    </body></html>
    """.encode("utf-8")

    def test_nav_removed_and_paragraphs_kept(self):
        extracted = extract_text(
            self.NAV_PAGE, simple_site(), url="https://a.example/eins.html"
        )
        document = extracted.document
        assert document.paragraph_texts() == [
            "Erster Absatz steht hier. Er hat zwei Sätze.",
            "Zweiter Absatz folgt.",
        ]
        assert [s.text for s in document.sentences] == [
            "Erster Absatz steht hier.",
            "Er hat zwei Sätze.",
            "Zweiter Absatz folgt.",
        ]
        assert "Navigation" not in " ".join(document.texts())
        assert extracted.title == "Seite Eins | Beispiel"
        assert "https://a.example/other.html" in extracted.links

    def test_empty_remove_selectors_keeps_content(self):
        extracted = extract_text(
            self.NAV_PAGE,
            simple_site(remove_selectors=()),
            url="https://a.example/eins.html",
        )
        # The nav sits outside the content selector either way.
        assert extracted.document.paragraph_texts()[0].startswith("Erster Absatz")

    def test_list_items_become_paragraphs(self):
        page = """
        <html><body><div id="content"><ul>
          <li>Erster Punkt der Liste.</li>
          <li>Zweiter Punkt der Liste.</li>
        </ul></div></body></html>
        """.encode("utf-8")
        extracted = extract_text(page, simple_site(), url="https://a.example/l.html")
        assert extracted.document.paragraph_texts() == [
            "Erster Punkt der Liste.",
            "Zweiter Punkt der Liste.",
        ]

    def test_selector_matching_nothing_is_an_error(self):
        with pytest.raises(ExtractionError, match="test.*matched nothing"):
            extract_text(b"<html><body><p>x</p></body></html>", simple_site(), url="u")

    def test_extraction_is_deterministic(self):
        first = extract_text(self.NAV_PAGE, simple_site(), url="https://a.example/e")
        second = extract_text(self.NAV_PAGE, simple_site(), url="https://a.example/e")
        assert first.document == second.document
        assert first.links == second.links

    def test_broken_markup_tolerated(self):
        page = b"<div id=content><p>Ein Satz ohne Ende <p>Zweiter Satz hier.</div>"
        extracted = extract_text(page, simple_site(), url="u")
        text = " ".join(extracted.document.texts())
        assert "Ein Satz ohne Ende" in text
        assert "Zweiter Satz hier." in text

    def test_metadata_carried_through(self):
        extracted = extract_text(
            self.NAV_PAGE,
            simple_site(license_tag="MIT"),
            url="https://a.example/eins.html",
            access_date="2023-01-01",
            raw_html_path="raw/eins.html",
        )
        assert extracted.document.license_tag == "MIT"
        assert extracted.document.access_date == "2023-01-01"
        assert extracted.document.source_url == "https://a.example/eins.html"
        assert extracted.raw_html_path == "raw/eins.html"


class TestSelectors:
    def test_id_class_and_descendant(self):
        root = htmltext.parse_html(
            "<div id='a' class='x y'><p class='y'>eins</p></div><p>zwei</p>"
        )
        assert len(htmltext.select(root, "#a")) == 1
        assert len(htmltext.select(root, ".y")) == 2
        assert len(htmltext.select(root, "div.x p.y")) == 1
        assert len(htmltext.select(root, "p")) == 2
        assert len(htmltext.select(root, "#a p, p")) == 2

    def test_bad_selector_is_an_error(self):
        root = htmltext.parse_html("<p>x</p>")
        with pytest.raises(ValidationError):
            htmltext.select(root, "p > div")
        with pytest.raises(ValidationError):
            htmltext.select(root, "")


class TestHelpers:
    def test_slugify(self):
        assert slugify_url("https://a.example/pfad/Seite-EINS.html") == "seite-eins"
        assert slugify_url("https://a.example/", "complex") == "a-example-complex"

    def test_normalize_url(self):
        assert (
            normalize_url("/x.html", base="https://a.example/dir/seite.html")
            == "https://a.example/x.html"
        )
        assert normalize_url("https://a.example/x/#frag") == "https://a.example/x"

    def test_normalize_title_trims_site_suffix(self):
        assert normalize_title("Kredit | Bank AG") == "kredit"
        assert normalize_title("Kredit – Leichte Sprache") == "kredit"
        assert normalize_title("  Nur Titel  ") == "nur titel"


class TestSiteConfig:
    def test_rate_limit_minimum(self):
        with pytest.raises(ConfigurationError, match="rate_limit_ms"):
            simple_site(rate_limit_ms=10)

    def test_manual_map_needs_path(self):
        with pytest.raises(ConfigurationError, match="manual_map_path"):
            simple_site(pairing_strategy="manual_map", manual_map_path=None)

    def test_bad_role_rejected(self):
        with pytest.raises(ConfigurationError, match="role"):
            StartUrl(url="https://a.example", role="weird")

    def test_load_from_json_resolves_manual_map(self):
        sites = load_site_configs(HARVEST_DIR / "site_config.json")
        assert [site.site_id for site in sites] == ["bank", "ernaehrung", "maerchen"]
        maerchen = sites[2]
        assert maerchen.manual_map_path == str(HARVEST_DIR / "manual_map.tsv")


def extracted_stub(url, title, links=(), text="Ein Satz steht hier."):
    from plainalign.corpus_model import Document, Sentence
    from plainalign.harvester import ExtractedDocument

    return ExtractedDocument(
        document=Document(
            doc_id=slugify_url(url) + ("-s" if "leicht" in url else "-c"),
            sentences=(Sentence(index=0, text=text),),
        ),
        url=normalize_url(url),
        title=title,
        links=tuple(normalize_url(link) for link in links),
    )


class TestPairing:
    def test_link_reference_pairs_and_reports_leftovers(self):
        complex_docs = [
            extracted_stub(
                "https://a.example/eins.html",
                "Eins",
                links=["https://a.example/leicht/eins.html"],
            ),
            extracted_stub("https://a.example/zwei.html", "Zwei"),
        ]
        simple_docs = [
            extracted_stub("https://a.example/leicht/eins.html", "Eins leicht"),
        ]
        cfg = simple_site(pairing_strategy="link_reference")
        result = pair_documents(complex_docs, simple_docs, cfg)
        assert len(result.pairs) == 1
        assert result.strategy_by_pair[result.pairs[0].pair_id] == "link_reference"
        assert [u.doc_id for u in result.unpaired] == ["zwei-c"]

    def test_reverse_link_from_simple_side(self):
        complex_docs = [extracted_stub("https://a.example/eins.html", "Eins")]
        simple_docs = [
            extracted_stub(
                "https://a.example/leicht/eins.html",
                "Anders",
                links=["https://a.example/eins.html"],
            )
        ]
        cfg = simple_site(pairing_strategy="link_reference")
        result = pair_documents(complex_docs, simple_docs, cfg)
        assert len(result.pairs) == 1

    def test_title_match_after_links(self):
        complex_docs = [extracted_stub("https://a.example/k.html", "Kredit | Bank")]
        simple_docs = [
            extracted_stub("https://a.example/leicht/k.html", "Kredit – Leichte Sprache")
        ]
        result = pair_documents(complex_docs, simple_docs, simple_site())
        assert result.strategy_by_pair[result.pairs[0].pair_id] == "title_match"

    def test_strategy_ceiling_respected(self):
        # Same titles, but the site only allows link_reference.
        complex_docs = [extracted_stub("https://a.example/k.html", "Kredit")]
        simple_docs = [extracted_stub("https://a.example/leicht/k.html", "Kredit")]
        cfg = simple_site(pairing_strategy="link_reference")
        result = pair_documents(complex_docs, simple_docs, cfg)
        assert result.pairs == []
        assert len(result.unpaired) == 2

    def test_manual_map_unknown_url_lists_misses(self, tmp_path):
        manual = tmp_path / "map.tsv"
        manual.write_text(
            "https://a.example/known.html\thttps://a.example/ghost.html\n",
            encoding="utf-8",
        )
        cfg = simple_site(
            pairing_strategy="manual_map", manual_map_path=str(manual)
        )
        complex_docs = [extracted_stub("https://a.example/known.html", "K")]
        with pytest.raises(ValidationError, match="ghost"):
            pair_documents(complex_docs, [], cfg)

    def test_each_document_in_at_most_one_pair(self):
        complex_docs = [
            extracted_stub("https://a.example/a.html", "Titel Gleich"),
            extracted_stub("https://a.example/b.html", "Titel Gleich"),
        ]
        simple_docs = [extracted_stub("https://a.example/leicht/a.html", "Titel Gleich")]
        result = pair_documents(complex_docs, simple_docs, simple_site())
        assert len(result.pairs) == 1
        assert len(result.unpaired) == 1


class TestHarvestSite:
    def test_offline_harvest_end_to_end(self, tmp_path):
        sites = load_site_configs(HARVEST_DIR / "site_config.json")
        transport = FixtureTransport(HARVEST_DIR)
        rows, report = harvest_site(sites[0], transport, tmp_path)
        assert len(rows) == 3
        assert report.pairs_by_strategy == {"link_reference": 3}
        document = load_document(tmp_path / rows[0].complex_path)
        assert document.access_date == "2023-05-31"
        assert document.license_tag == "CC-BY-4.0"
        raw = tmp_path / "corpus" / "bank" / "raw" / "kredite-complex.html"
        assert raw.read_bytes() == (HARVEST_DIR / "pages" / "bank_kredite.html").read_bytes()

    def test_non_200_pages_are_skipped(self, tmp_path):
        config = simple_site(
            site_id="s404",
            start_urls=(
                StartUrl("https://a.example/ok.html", "complex"),
                StartUrl("https://a.example/gone.html", "simple"),
            ),
            pairing_strategy="link_reference",
        )
        transport = DictTransport(
            {
                "https://a.example/ok.html": (
                    200,
                    b"<div id='content'><p>Ein Satz steht hier.</p></div>",
                ),
                "https://a.example/gone.html": (404, b""),
            }
        )
        _rows, report = harvest_site(config, transport, tmp_path)
        assert report.n_skipped == 1
        assert report.n_fetched == 1
