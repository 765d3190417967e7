"""Fetch configured web pages, extract main text, and pair the documents.

The transport is injected so that the whole module runs offline against
fixture HTML; real crawling is a thin urllib adapter. Site configuration
is data, not code: each site declares its start URLs (tagged with the
``complex`` or ``simple`` role), a content selector, selectors for parts
to strip (navigation, ads, contact blocks), and a pairing strategy.

Documents of one site are paired by up to three strategies, attempted in
this order and each consuming only still-unpaired documents:

1. ``link_reference``: a complex page hyperlinks its simple counterpart
   (or the other way around),
2. ``title_match``: case-insensitive exact title equality after trimming
   a trailing site suffix,
3. ``manual_map``: an explicit two-column TSV of URLs.

The configured ``pairing_strategy`` is the last strategy the site may
escalate to; every document appears in at most one pair and leftovers are
reported, never dropped silently.
"""

from __future__ import annotations

import json
import logging
import os
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Callable, Iterable, Protocol, Sequence
from urllib.parse import urljoin, urlsplit, urlunsplit

from . import htmltext
from .corpus_model import Document, DocumentPair, ManifestRow
from .errors import (
    ConfigurationError,
    ExtractionError,
    TransportError,
    ValidationError,
)
from .preprocess import segment_sentences

logger = logging.getLogger("plainalign.harvester")

PAIRING_STRATEGIES = ("link_reference", "title_match", "manual_map")

MAX_RETRIES = 2

_TITLE_SUFFIX_SEPARATORS = (" | ", " – ", " — ")


@dataclass(frozen=True)
class StartUrl:
    url: str
    role: str  # "complex" or "simple"

    def __post_init__(self) -> None:
        if self.role not in ("complex", "simple"):
            raise ConfigurationError(
                f"start url role must be 'complex' or 'simple', got {self.role!r}"
            )


@dataclass(frozen=True)
class SiteConfig:
    """One harvested web site."""

    site_id: str
    start_urls: tuple[StartUrl, ...]
    content_selector: str
    remove_selectors: tuple[str, ...] = ()
    pairing_strategy: str = "link_reference"
    manual_map_path: str | None = None
    rate_limit_ms: int = 1000
    license_tag: str = ""
    domain_tag: str = "other"
    preview: bool = False

    def __post_init__(self) -> None:
        if not self.site_id:
            raise ConfigurationError("site_id must be non-empty")
        if not self.content_selector.strip():
            raise ConfigurationError(
                f"site {self.site_id!r}: content_selector must be non-empty"
            )
        if self.pairing_strategy not in PAIRING_STRATEGIES:
            raise ConfigurationError(
                f"site {self.site_id!r}: pairing_strategy must be one of "
                f"{PAIRING_STRATEGIES}, got {self.pairing_strategy!r}"
            )
        if self.pairing_strategy == "manual_map" and not self.manual_map_path:
            raise ConfigurationError(
                f"site {self.site_id!r}: manual_map strategy needs manual_map_path"
            )
        if self.rate_limit_ms < 100:
            raise ConfigurationError(
                f"site {self.site_id!r}: rate_limit_ms must be >= 100, "
                f"got {self.rate_limit_ms}"
            )


def load_site_configs(path: str | Path) -> list[SiteConfig]:
    """Read a JSON array of site configurations."""
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, list):
        raise ConfigurationError(f"{path}: expected a JSON array of sites")
    sites = []
    for entry in raw:
        start_urls = tuple(
            StartUrl(url=item["url"], role=item["role"])
            for item in entry.get("start_urls", [])
        )
        manual_map_path = entry.get("manual_map_path")
        if manual_map_path and not Path(manual_map_path).is_absolute():
            # Relative to the config file, not the working directory.
            manual_map_path = str(path.parent / manual_map_path)
        sites.append(
            SiteConfig(
                site_id=entry["site_id"],
                start_urls=start_urls,
                content_selector=entry["content_selector"],
                remove_selectors=tuple(entry.get("remove_selectors", [])),
                pairing_strategy=entry.get("pairing_strategy", "link_reference"),
                manual_map_path=manual_map_path,
                rate_limit_ms=entry.get("rate_limit_ms", 1000),
                license_tag=entry.get("license_tag", ""),
                domain_tag=entry.get("domain_tag", "other"),
                preview=entry.get("preview", False),
            )
        )
    return sites


# ---------------------------------------------------------------------------
# Fetching


@dataclass(frozen=True)
class FetchRecord:
    url: str
    status: int
    body: bytes
    access_date: str


class Transport(Protocol):
    def get(self, url: str) -> tuple[int, bytes]:
        """Return (status, body) or raise TransportError."""


class UrllibTransport:
    """Real HTTP transport; a thin adapter around urllib."""

    def __init__(self, timeout: float = 30.0, user_agent: str = "plainalign/0.1"):
        self.timeout = timeout
        self.user_agent = user_agent

    def get(self, url: str) -> tuple[int, bytes]:
        request = urllib.request.Request(url, headers={"User-Agent": self.user_agent})
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                return response.status, response.read()
        except urllib.error.HTTPError as exc:
            return exc.code, exc.read() or b""
        except OSError as exc:
            raise TransportError(f"fetch failed for {url}: {exc}") from exc


class FixtureTransport:
    """Offline transport backed by a directory of recorded pages.

    The directory holds ``fixtures.json`` mapping URL to
    ``{"file": <relative path>, "status": <int>, "access_date": <iso>}``;
    ``status`` defaults to 200. Unlisted URLs raise TransportError.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        index_path = self.root / "fixtures.json"
        if not index_path.exists():
            raise ConfigurationError(f"no fixtures.json under {self.root}")
        with open(index_path, encoding="utf-8") as handle:
            self.index: dict[str, dict] = json.load(handle)

    def get(self, url: str) -> tuple[int, bytes]:
        entry = self.index.get(url)
        if entry is None:
            raise TransportError(f"no fixture recorded for {url}")
        status = int(entry.get("status", 200))
        body = b""
        if entry.get("file"):
            body = (self.root / entry["file"]).read_bytes()
        return status, body

    def access_date_for(self, url: str) -> str | None:
        entry = self.index.get(url)
        if entry is None:
            return None
        return entry.get("access_date")


class Fetcher:
    """Rate-limited, retrying fetch front-end over a transport.

    Requests to one host are spaced at least ``rate_limit_ms`` apart; a
    failed request is retried at most twice before the error propagates.
    The clock and sleep functions are injectable for testing.
    """

    def __init__(
        self,
        transport: Transport,
        rate_limit_ms: int = 1000,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
        today: Callable[[], str] = lambda: date.today().isoformat(),
    ):
        self.transport = transport
        self.rate_limit_ms = rate_limit_ms
        self.clock = clock
        self.sleep = sleep
        self.today = today
        self._last_request: dict[str, float] = {}

    def fetch(self, url: str) -> FetchRecord:
        host = urlsplit(url).netloc
        earliest = self._last_request.get(host)
        if earliest is not None:
            wait = earliest + self.rate_limit_ms / 1000.0 - self.clock()
            if wait > 0:
                self.sleep(wait)
        last_error: TransportError | None = None
        for _attempt in range(1 + MAX_RETRIES):
            self._last_request[host] = self.clock()
            try:
                status, body = self.transport.get(url)
                break
            except TransportError as exc:
                last_error = exc
        else:
            raise TransportError(f"fetch failed after retries: {url}") from last_error
        access_date = None
        if isinstance(self.transport, FixtureTransport):
            access_date = self.transport.access_date_for(url)
        return FetchRecord(
            url=url,
            status=status,
            body=body,
            access_date=access_date or self.today(),
        )


def fetch(url: str, transport: Transport, **kwargs) -> FetchRecord:
    """One-shot fetch with the default retry policy."""
    return Fetcher(transport, **kwargs).fetch(url)


# ---------------------------------------------------------------------------
# Extraction


@dataclass(frozen=True)
class ExtractedDocument:
    """A Document plus the page metadata the pairing strategies need."""

    document: Document
    url: str
    title: str
    links: tuple[str, ...]
    raw_html_path: str | None = None

    @property
    def doc_id(self) -> str:
        return self.document.doc_id


def slugify_url(url: str, role: str | None = None) -> str:
    """Deterministic file-name-safe document id for a page URL."""
    split = urlsplit(url)
    segment = [part for part in split.path.split("/") if part]
    base = segment[-1] if segment else split.netloc or "index"
    for suffix in (".html", ".htm", ".php"):
        if base.endswith(suffix):
            base = base[: -len(suffix)]
    cleaned = "".join(ch if ch.isalnum() else "-" for ch in base.lower()).strip("-")
    cleaned = cleaned or "index"
    return f"{cleaned}-{role}" if role else cleaned


def normalize_url(url: str, base: str | None = None) -> str:
    """Absolute form without fragment; trailing slash trimmed."""
    if base:
        url = urljoin(base, url)
    split = urlsplit(url)
    path = split.path.rstrip("/") or "/"
    return urlunsplit((split.scheme, split.netloc, path, split.query, ""))


def extract_text(
    html: bytes,
    cfg: SiteConfig,
    *,
    url: str = "",
    doc_id: str | None = None,
    access_date: str | None = None,
    raw_html_path: str | None = None,
    language_level: str | None = None,
) -> ExtractedDocument:
    """Extract the main text of a page with paragraph boundaries.

    Nodes matching ``cfg.remove_selectors`` are dropped, the subtree(s)
    matching ``cfg.content_selector`` are flattened (block elements and
    ``<br>`` runs become paragraph boundaries, whitespace collapses), and
    the text is segmented into sentences. Links and the page title are
    collected from the whole page because pairing needs them even when
    they sit inside removed navigation.
    """
    root = htmltext.parse_html(html)
    removed: set[int] = set()
    for selector in cfg.remove_selectors:
        for element in htmltext.select(root, selector):
            removed.add(id(element))
    content_nodes = [
        element
        for element in htmltext.select(root, cfg.content_selector)
        if id(element) not in removed
    ]
    content_nodes = htmltext.top_level(content_nodes)
    if not content_nodes:
        raise ExtractionError(
            f"site {cfg.site_id!r}: content selector "
            f"{cfg.content_selector!r} matched nothing at {url or '<no url>'}"
        )
    paragraphs = htmltext.extract_paragraphs(content_nodes, removed)
    sentences = segment_sentences("\n\n".join(paragraphs))
    document = Document(
        doc_id=doc_id or slugify_url(url),
        sentences=tuple(sentences),
        language_level=language_level,
        source_url=url or None,
        access_date=access_date,
        license_tag=cfg.license_tag,
    )
    links = tuple(
        normalize_url(href, base=url) for href in htmltext.collect_links(root)
    )
    return ExtractedDocument(
        document=document,
        url=normalize_url(url) if url else "",
        title=htmltext.find_title(root),
        links=links,
        raw_html_path=raw_html_path,
    )


# ---------------------------------------------------------------------------
# Pairing


@dataclass(frozen=True)
class UnpairedDocument:
    url: str
    doc_id: str
    role: str


@dataclass(frozen=True)
class PairingResult:
    pairs: list[DocumentPair]
    strategy_by_pair: dict[str, str]
    unpaired: list[UnpairedDocument]


def load_manual_map(path: str | Path) -> list[tuple[str, str]]:
    """Two-column TSV of complex URL and simple URL; ``#`` comments allowed."""
    entries = []
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ValidationError(
                    f"{path}: line {line_no}: expected two tab-separated URLs"
                )
            entries.append((fields[0], fields[1]))
    return entries


def normalize_title(title: str) -> str:
    """Lowercased, whitespace-collapsed title with a site suffix trimmed."""
    for separator in _TITLE_SUFFIX_SEPARATORS:
        if separator in title:
            title = title.split(separator, 1)[0]
    return " ".join(title.lower().split())


def pair_documents(
    complex_docs: Sequence[ExtractedDocument],
    simple_docs: Sequence[ExtractedDocument],
    cfg: SiteConfig,
) -> PairingResult:
    """Pair complex with simple documents using the site's strategies.

    Strategies run in the fixed order link_reference, title_match,
    manual_map, stopping at ``cfg.pairing_strategy``; each strategy only
    sees documents no earlier strategy paired. Pairing is injective on
    both sides.
    """
    enabled = PAIRING_STRATEGIES[: PAIRING_STRATEGIES.index(cfg.pairing_strategy) + 1]
    free_complex = list(complex_docs)
    free_simple = list(simple_docs)
    matched: list[tuple[ExtractedDocument, ExtractedDocument, str]] = []

    def take(
        complex_doc: ExtractedDocument, simple_doc: ExtractedDocument, strategy: str
    ) -> None:
        matched.append((complex_doc, simple_doc, strategy))
        free_complex.remove(complex_doc)
        free_simple.remove(simple_doc)

    if "link_reference" in enabled:
        for complex_doc in list(free_complex):
            target = _linked_partner(complex_doc, free_simple)
            if target is not None:
                take(complex_doc, target, "link_reference")
        for simple_doc in list(free_simple):
            target = _linked_partner(simple_doc, free_complex)
            if target is not None:
                take(target, simple_doc, "link_reference")

    if "title_match" in enabled:
        for complex_doc in list(free_complex):
            key = normalize_title(complex_doc.title)
            if not key:
                continue
            for simple_doc in free_simple:
                if normalize_title(simple_doc.title) == key:
                    take(complex_doc, simple_doc, "title_match")
                    break

    if "manual_map" in enabled and cfg.manual_map_path:
        by_url_complex = {doc.url: doc for doc in complex_docs}
        by_url_simple = {doc.url: doc for doc in simple_docs}
        misses = []
        entries = load_manual_map(cfg.manual_map_path)
        for complex_url, simple_url in entries:
            if normalize_url(complex_url) not in by_url_complex:
                misses.append(complex_url)
            if normalize_url(simple_url) not in by_url_simple:
                misses.append(simple_url)
        if misses:
            raise ValidationError(
                f"site {cfg.site_id!r}: manual map references unknown URL(s): "
                f"{misses}"
            )
        for complex_url, simple_url in entries:
            complex_doc = by_url_complex[normalize_url(complex_url)]
            simple_doc = by_url_simple[normalize_url(simple_url)]
            if complex_doc in free_complex and simple_doc in free_simple:
                take(complex_doc, simple_doc, "manual_map")

    pairs = []
    strategy_by_pair = {}
    for sequence, (complex_doc, simple_doc, strategy) in enumerate(matched, start=1):
        pair_id = f"{cfg.site_id}-{sequence:03d}"
        pairs.append(
            DocumentPair(
                pair_id=pair_id,
                complex=complex_doc.document,
                simple=simple_doc.document,
                domain_tag=cfg.domain_tag,
            )
        )
        strategy_by_pair[pair_id] = strategy
    unpaired = [
        UnpairedDocument(url=doc.url, doc_id=doc.doc_id, role=role)
        for docs, role in ((free_complex, "complex"), (free_simple, "simple"))
        for doc in docs
    ]
    return PairingResult(
        pairs=pairs, strategy_by_pair=strategy_by_pair, unpaired=unpaired
    )


def _linked_partner(
    doc: ExtractedDocument, candidates: Sequence[ExtractedDocument]
) -> ExtractedDocument | None:
    by_url = {candidate.url: candidate for candidate in candidates}
    for link in doc.links:
        if link in by_url and link != doc.url:
            return by_url[link]
    return None


# ---------------------------------------------------------------------------
# Whole-site harvest


@dataclass(frozen=True)
class HarvestReport:
    site_id: str
    n_fetched: int
    n_skipped: int
    pairs_by_strategy: dict[str, int]
    unpaired: list[UnpairedDocument]


def harvest_site(
    cfg: SiteConfig,
    transport: Transport,
    out_dir: str | Path,
    fetcher: Fetcher | None = None,
) -> tuple[list[ManifestRow], HarvestReport]:
    """Fetch, extract, pair, and persist one site.

    Layout under ``out_dir``: ``corpus/<site_id>/<doc_id>.txt`` plus the
    metadata sidecar and ``corpus/<site_id>/raw/<doc_id>.html``. Returns
    manifest rows (paths relative to ``out_dir``) and a report.
    """
    out_dir = Path(out_dir)
    site_dir = out_dir / "corpus" / cfg.site_id
    raw_dir = site_dir / "raw"
    fetcher = fetcher or Fetcher(transport, rate_limit_ms=cfg.rate_limit_ms)
    extracted: dict[str, list[ExtractedDocument]] = {"complex": [], "simple": []}
    used_ids: set[str] = set()
    n_fetched = 0
    n_skipped = 0
    for start in cfg.start_urls:
        record = fetcher.fetch(start.url)
        if record.status != 200:
            logger.warning(
                "skipping %s (%s): HTTP status %d", start.url, cfg.site_id, record.status
            )
            n_skipped += 1
            continue
        n_fetched += 1
        doc_id = slugify_url(start.url, start.role)
        serial = 2
        while doc_id in used_ids:
            doc_id = f"{slugify_url(start.url, start.role)}-{serial}"
            serial += 1
        used_ids.add(doc_id)
        raw_path = raw_dir / f"{doc_id}.html"
        raw_dir.mkdir(parents=True, exist_ok=True)
        raw_path.write_bytes(record.body)
        extracted[start.role].append(
            extract_text(
                record.body,
                cfg,
                url=start.url,
                doc_id=doc_id,
                access_date=record.access_date,
                raw_html_path=str(raw_path.relative_to(out_dir)),
            )
        )
    result = pair_documents(extracted["complex"], extracted["simple"], cfg)
    manifest_rows = []
    for pair in result.pairs:
        for document in (pair.complex, pair.simple):
            _save_harvested_document(document, site_dir, preview=cfg.preview)
        manifest_rows.append(
            ManifestRow(
                pair_id=pair.pair_id,
                complex_path=f"corpus/{cfg.site_id}/{pair.complex.doc_id}.txt",
                simple_path=f"corpus/{cfg.site_id}/{pair.simple.doc_id}.txt",
                domain_tag=pair.domain_tag,
            )
        )
    # Unpaired documents are persisted too; they are reported, not dropped.
    paired_ids = {
        doc_id
        for pair in result.pairs
        for doc_id in (pair.complex.doc_id, pair.simple.doc_id)
    }
    for role in ("complex", "simple"):
        for extracted_doc in extracted[role]:
            if extracted_doc.doc_id not in paired_ids:
                _save_harvested_document(
                    extracted_doc.document, site_dir, preview=cfg.preview
                )
    strategy_counts: dict[str, int] = {}
    for strategy in result.strategy_by_pair.values():
        strategy_counts[strategy] = strategy_counts.get(strategy, 0) + 1
    report = HarvestReport(
        site_id=cfg.site_id,
        n_fetched=n_fetched,
        n_skipped=n_skipped,
        pairs_by_strategy=strategy_counts,
        unpaired=result.unpaired,
    )
    return manifest_rows, report


def _save_harvested_document(
    document: Document, site_dir: Path, preview: bool = False
) -> None:
    from .corpus_model import save_document

    path = site_dir / f"{document.doc_id}.txt"
    save_document(document, path)
    if preview:
        meta_path = path.with_suffix(".meta.json")
        with open(meta_path, encoding="utf-8") as handle:
            meta = json.load(handle)
        meta["preview"] = True
        with open(meta_path, "w", encoding="utf-8", newline="\n") as handle:
            json.dump(meta, handle, ensure_ascii=False, sort_keys=True, indent=2)
            handle.write("\n")


def append_manifest_atomically(
    rows: Iterable[ManifestRow], manifest_path: str | Path
) -> None:
    """Merge rows into the manifest and replace it atomically."""
    from .corpus_model import load_manifest, save_manifest

    manifest_path = Path(manifest_path)
    existing: list[ManifestRow] = []
    if manifest_path.exists():
        existing = load_manifest(manifest_path)
    known = {row.pair_id for row in existing}
    merged = existing + [row for row in rows if row.pair_id not in known]
    temp_path = manifest_path.with_name(manifest_path.name + ".tmp")
    save_manifest(merged, temp_path)
    os.replace(temp_path, manifest_path)
