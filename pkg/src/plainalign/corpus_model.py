"""Core data types and file formats for complex/simplified parallel corpora.

A corpus is a set of document pairs (a complex document and its simplified
counterpart) plus sentence-level alignment records. All types are immutable
after construction and safe to share across parallel workers.

File formats (all UTF-8, LF line endings):

* Document file: one sentence per line, blank line = paragraph boundary.
  A sidecar ``<name>.meta.json`` holds ``doc_id``, ``language_level``,
  ``source_url``, ``access_date`` and ``license_tag``.
* Alignment file: TSV with a required header line and columns ``pair_id``,
  ``complex_indices`` (comma-separated, may be empty), ``simple_indices``
  and an optional ``label``.
* Manifest: TSV with header mapping ``pair_id`` to the two document paths
  (relative to the manifest) and a ``domain_tag``.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .errors import FormatError, ValidationError

CEFR_LEVELS = ("A1", "A2", "B1", "B2", "C1", "C2")

DOMAIN_TAGS = (
    "news",
    "bible",
    "fiction",
    "health",
    "language-learner",
    "accessibility",
    "public-authority",
    "other",
)

ALIGNMENT_FILE_HEADER = ("pair_id", "complex_indices", "simple_indices", "label")
MANIFEST_HEADER = ("pair_id", "complex_path", "simple_path", "domain_tag")


class AlignmentType(Enum):
    """Arity-and-content class of one alignment record."""

    IDENTICAL = "identical"
    REPHRASE_1_1 = "rephrase_1_1"
    SPLIT_1_M = "split_1_m"
    MERGE_N_1 = "merge_n_1"
    FUSION_N_M = "fusion_n_m"
    DELETION_1_0 = "deletion_1_0"
    ADDITION_0_1 = "addition_0_1"


class AnnotationLabel(Enum):
    """Per-sentence-combination judgement used for agreement computation."""

    ALIGNED = "aligned"
    PARTIAL = "partial"
    NOT_ALIGNED = "not_aligned"


@dataclass(frozen=True)
class Sentence:
    """One sentence of a document.

    ``index`` is the zero-based ordinal within the document and
    ``paragraph_index`` the zero-based ordinal of its paragraph.
    """

    index: int
    text: str
    paragraph_index: int = 0

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValidationError(f"sentence index must be >= 0, got {self.index}")
        if self.paragraph_index < 0:
            raise ValidationError(
                f"paragraph index must be >= 0, got {self.paragraph_index}"
            )
        if not self.text.strip():
            raise ValidationError(f"sentence {self.index}: text is empty")
        if "\n" in self.text or "\r" in self.text:
            raise ValidationError(
                f"sentence {self.index}: text must not contain line breaks"
            )


@dataclass(frozen=True)
class Document:
    """An ordered sequence of sentences with provenance metadata."""

    doc_id: str
    sentences: tuple[Sentence, ...]
    language_level: str | None = None
    source_url: str | None = None
    access_date: str | None = None
    license_tag: str = ""

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise ValidationError("doc_id must be non-empty")
        object.__setattr__(self, "sentences", tuple(self.sentences))
        if self.language_level is not None and self.language_level not in CEFR_LEVELS:
            raise ValidationError(
                f"document {self.doc_id!r}: language_level must be one of "
                f"{CEFR_LEVELS}, got {self.language_level!r}"
            )
        previous_paragraph = 0
        for position, sentence in enumerate(self.sentences):
            if sentence.index != position:
                raise ValidationError(
                    f"document {self.doc_id!r}: sentence indices must be dense and "
                    f"increasing, expected {position} got {sentence.index}"
                )
            jump = sentence.paragraph_index - previous_paragraph
            if jump < 0 or jump > 1 or (position == 0 and sentence.paragraph_index != 0):
                raise ValidationError(
                    f"document {self.doc_id!r}: paragraph indices must be dense and "
                    f"non-decreasing, got {sentence.paragraph_index} at sentence "
                    f"{position}"
                )
            previous_paragraph = sentence.paragraph_index

    def __len__(self) -> int:
        return len(self.sentences)

    def texts(self) -> list[str]:
        return [sentence.text for sentence in self.sentences]

    def paragraph_count(self) -> int:
        if not self.sentences:
            return 0
        return self.sentences[-1].paragraph_index + 1

    def paragraph_texts(self) -> list[str]:
        """Sentence texts joined per paragraph, in paragraph order."""
        paragraphs: list[list[str]] = [[] for _ in range(self.paragraph_count())]
        for sentence in self.sentences:
            paragraphs[sentence.paragraph_index].append(sentence.text)
        return [" ".join(parts) for parts in paragraphs]


@dataclass(frozen=True)
class DocumentPair:
    """A complex document and its simplified counterpart."""

    pair_id: str
    complex: Document
    simple: Document
    domain_tag: str = "other"

    def __post_init__(self) -> None:
        if not self.pair_id:
            raise ValidationError("pair_id must be non-empty")
        if self.complex.doc_id == self.simple.doc_id:
            raise ValidationError(
                f"pair {self.pair_id!r}: complex and simple doc_id must differ"
            )
        if self.domain_tag not in DOMAIN_TAGS:
            raise ValidationError(
                f"pair {self.pair_id!r}: domain_tag must be one of {DOMAIN_TAGS}, "
                f"got {self.domain_tag!r}"
            )


@dataclass(frozen=True)
class SentenceAlignmentRecord:
    """One n:m link between complex and simple sentence ordinals.

    Either side may be empty (deletion / addition), never both.
    """

    complex_indices: tuple[int, ...]
    simple_indices: tuple[int, ...]

    def __post_init__(self) -> None:
        complex_indices = tuple(sorted(set(self.complex_indices)))
        simple_indices = tuple(sorted(set(self.simple_indices)))
        object.__setattr__(self, "complex_indices", complex_indices)
        object.__setattr__(self, "simple_indices", simple_indices)
        if not complex_indices and not simple_indices:
            raise ValidationError("alignment record must have at least one index")
        if any(i < 0 for i in complex_indices + simple_indices):
            raise ValidationError(
                f"alignment record {self.describe()}: indices must be >= 0"
            )

    def describe(self) -> str:
        return (
            f"({','.join(map(str, self.complex_indices))}:"
            f"{','.join(map(str, self.simple_indices))})"
        )


@dataclass(frozen=True)
class AlignmentRow:
    """One parsed line of an alignment file."""

    pair_id: str
    record: SentenceAlignmentRecord
    label: AnnotationLabel | None = None


def expand_to_pairs(record: SentenceAlignmentRecord) -> set[tuple[int, int]]:
    """Cartesian product of the two index sets of a record.

    Deletion and addition records expand to the empty set.
    """
    return {
        (c, s) for c in record.complex_indices for s in record.simple_indices
    }


def validate_record(record: SentenceAlignmentRecord, pair: DocumentPair) -> None:
    """Check that every index of ``record`` is in bounds for ``pair``."""
    n_complex = len(pair.complex.sentences)
    n_simple = len(pair.simple.sentences)
    for index in record.complex_indices:
        if index >= n_complex:
            raise ValidationError(
                f"record {record.describe()} in pair {pair.pair_id!r}: complex index "
                f"{index} out of bounds (document has {n_complex} sentences)"
            )
    for index in record.simple_indices:
        if index >= n_simple:
            raise ValidationError(
                f"record {record.describe()} in pair {pair.pair_id!r}: simple index "
                f"{index} out of bounds (document has {n_simple} sentences)"
            )


def validate_alignment_set(
    records: Sequence[SentenceAlignmentRecord], pair: DocumentPair
) -> None:
    """Check bounds and that no expanded pair occurs in two records."""
    seen: dict[tuple[int, int], SentenceAlignmentRecord] = {}
    for record in records:
        validate_record(record, pair)
        for expanded in expand_to_pairs(record):
            if expanded in seen:
                raise ValidationError(
                    f"pair {pair.pair_id!r}: sentence pair {expanded} occurs in both "
                    f"{seen[expanded].describe()} and {record.describe()}"
                )
            seen[expanded] = record


def _identity_form(text: str) -> str:
    # NFC so composed/decomposed variants of the same characters compare equal.
    return unicodedata.normalize("NFC", text).strip()


def classify_alignment_type(
    record: SentenceAlignmentRecord, pair: DocumentPair
) -> AlignmentType:
    """Assign exactly one :class:`AlignmentType` to a record."""
    validate_record(record, pair)
    n_complex = len(record.complex_indices)
    n_simple = len(record.simple_indices)
    if n_simple == 0:
        return AlignmentType.DELETION_1_0
    if n_complex == 0:
        return AlignmentType.ADDITION_0_1
    if n_complex == 1 and n_simple == 1:
        complex_text = pair.complex.sentences[record.complex_indices[0]].text
        simple_text = pair.simple.sentences[record.simple_indices[0]].text
        if _identity_form(complex_text) == _identity_form(simple_text):
            return AlignmentType.IDENTICAL
        return AlignmentType.REPHRASE_1_1
    if n_complex == 1:
        return AlignmentType.SPLIT_1_M
    if n_simple == 1:
        return AlignmentType.MERGE_N_1
    return AlignmentType.FUSION_N_M


# ---------------------------------------------------------------------------
# Document files


def _meta_path(path: Path) -> Path:
    if path.suffix == ".txt":
        return path.with_suffix(".meta.json")
    return path.with_name(path.name + ".meta.json")


def save_document(document: Document, path: str | Path) -> None:
    """Write the document file and its metadata sidecar."""
    path = Path(path)
    lines: list[str] = []
    previous_paragraph = 0
    for sentence in document.sentences:
        if sentence.paragraph_index > previous_paragraph:
            lines.append("")
            previous_paragraph = sentence.paragraph_index
        lines.append(sentence.text)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for line in lines:
            handle.write(line + "\n")
    meta = {
        "doc_id": document.doc_id,
        "language_level": document.language_level,
        "source_url": document.source_url,
        "access_date": document.access_date,
        "license_tag": document.license_tag,
    }
    with open(_meta_path(path), "w", encoding="utf-8", newline="\n") as handle:
        json.dump(meta, handle, ensure_ascii=False, sort_keys=True, indent=2)
        handle.write("\n")


def load_document(path: str | Path, doc_id: str | None = None) -> Document:
    """Read a document file plus its metadata sidecar (if present)."""
    path = Path(path)
    meta: dict = {}
    meta_path = _meta_path(path)
    if meta_path.exists():
        with open(meta_path, encoding="utf-8") as handle:
            meta = json.load(handle)
    sentences: list[Sentence] = []
    paragraph = 0
    saw_content = False
    pending_break = False
    with open(path, encoding="utf-8", newline="\n") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if line == "":
                pending_break = saw_content
                continue
            if not line.strip():
                raise FormatError(
                    "whitespace-only line is neither a sentence nor a paragraph break",
                    path=path,
                    line_no=line_no,
                )
            if pending_break:
                paragraph += 1
                pending_break = False
            saw_content = True
            sentences.append(
                Sentence(index=len(sentences), text=line, paragraph_index=paragraph)
            )
    return Document(
        doc_id=doc_id or meta.get("doc_id") or path.stem,
        sentences=tuple(sentences),
        language_level=meta.get("language_level"),
        source_url=meta.get("source_url"),
        access_date=meta.get("access_date"),
        license_tag=meta.get("license_tag", ""),
    )


# ---------------------------------------------------------------------------
# Alignment files


def _parse_index_field(
    value: str, *, path: Path, line_no: int, field: str
) -> tuple[int, ...]:
    if value == "":
        return ()
    indices = []
    for part in value.split(","):
        try:
            indices.append(int(part))
        except ValueError:
            raise FormatError(
                f"expected comma-separated integers, got {value!r}",
                path=path,
                line_no=line_no,
                field=field,
            ) from None
    return tuple(indices)


def load_alignment_rows(path: str | Path) -> list[AlignmentRow]:
    """Parse an alignment TSV into rows, preserving file order."""
    path = Path(path)
    rows: list[AlignmentRow] = []
    with open(path, encoding="utf-8", newline="\n") as handle:
        lines = handle.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise FormatError("alignment file is empty, header required", path=path)
    header = tuple(lines[0].split("\t"))
    if header not in (ALIGNMENT_FILE_HEADER, ALIGNMENT_FILE_HEADER[:3]):
        raise FormatError(
            f"bad header {lines[0]!r}, expected "
            f"{chr(9).join(ALIGNMENT_FILE_HEADER)!r}",
            path=path,
            line_no=1,
        )
    for line_no, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        fields = line.split("\t")
        if len(fields) not in (3, 4):
            raise FormatError(
                f"expected 3 or 4 tab-separated fields, got {len(fields)}",
                path=path,
                line_no=line_no,
            )
        pair_id = fields[0]
        if not pair_id:
            raise FormatError(
                "pair_id must be non-empty", path=path, line_no=line_no, field="pair_id"
            )
        complex_indices = _parse_index_field(
            fields[1], path=path, line_no=line_no, field="complex_indices"
        )
        simple_indices = _parse_index_field(
            fields[2], path=path, line_no=line_no, field="simple_indices"
        )
        label: AnnotationLabel | None = None
        if len(fields) == 4 and fields[3] != "":
            try:
                label = AnnotationLabel(fields[3])
            except ValueError:
                raise FormatError(
                    f"unknown label {fields[3]!r}",
                    path=path,
                    line_no=line_no,
                    field="label",
                ) from None
        try:
            record = SentenceAlignmentRecord(complex_indices, simple_indices)
        except ValidationError as exc:
            raise FormatError(str(exc), path=path, line_no=line_no) from None
        rows.append(AlignmentRow(pair_id=pair_id, record=record, label=label))
    return rows


def load_alignments(path: str | Path) -> dict[str, list[SentenceAlignmentRecord]]:
    """Alignment records grouped by pair_id, file order preserved."""
    grouped: dict[str, list[SentenceAlignmentRecord]] = {}
    for row in load_alignment_rows(path):
        grouped.setdefault(row.pair_id, []).append(row.record)
    return grouped


def save_alignments(
    records_by_pair: Mapping[str, Sequence[SentenceAlignmentRecord]],
    path: str | Path,
    labels_by_pair: Mapping[str, Sequence[AnnotationLabel | None]] | None = None,
) -> None:
    """Write an alignment TSV (header always included)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\t".join(ALIGNMENT_FILE_HEADER) + "\n")
        for pair_id, records in records_by_pair.items():
            labels: Sequence[AnnotationLabel | None]
            labels = (
                labels_by_pair.get(pair_id, [None] * len(records))
                if labels_by_pair
                else [None] * len(records)
            )
            for record, label in zip(records, labels):
                handle.write(
                    "\t".join(
                        (
                            pair_id,
                            ",".join(map(str, record.complex_indices)),
                            ",".join(map(str, record.simple_indices)),
                            label.value if label is not None else "",
                        )
                    )
                    + "\n"
                )


# ---------------------------------------------------------------------------
# Manifest and whole-corpus round trip


@dataclass(frozen=True)
class ManifestRow:
    pair_id: str
    complex_path: str
    simple_path: str
    domain_tag: str


def load_manifest(path: str | Path) -> list[ManifestRow]:
    path = Path(path)
    with open(path, encoding="utf-8", newline="\n") as handle:
        lines = handle.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or tuple(lines[0].split("\t")) != MANIFEST_HEADER:
        raise FormatError(
            f"bad manifest header, expected {chr(9).join(MANIFEST_HEADER)!r}",
            path=path,
            line_no=1,
        )
    rows = []
    seen_ids: set[str] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise FormatError(
                f"expected 4 tab-separated fields, got {len(fields)}",
                path=path,
                line_no=line_no,
            )
        pair_id, complex_path, simple_path, domain_tag = fields
        if pair_id in seen_ids:
            raise FormatError(
                f"duplicate pair_id {pair_id!r}",
                path=path,
                line_no=line_no,
                field="pair_id",
            )
        seen_ids.add(pair_id)
        rows.append(ManifestRow(pair_id, complex_path, simple_path, domain_tag))
    return rows


def save_manifest(rows: Sequence[ManifestRow], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\t".join(MANIFEST_HEADER) + "\n")
        for row in rows:
            handle.write(
                f"{row.pair_id}\t{row.complex_path}\t{row.simple_path}"
                f"\t{row.domain_tag}\n"
            )


Corpus = list[tuple[DocumentPair, list[SentenceAlignmentRecord]]]


def load_pairs(manifest_path: str | Path) -> list[DocumentPair]:
    """Load all document pairs referenced by a manifest."""
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    documents: dict[str, Document] = {}

    def document_at(relative: str) -> Document:
        if relative not in documents:
            documents[relative] = load_document(base / relative)
        return documents[relative]

    pairs = []
    for row in load_manifest(manifest_path):
        pairs.append(
            DocumentPair(
                pair_id=row.pair_id,
                complex=document_at(row.complex_path),
                simple=document_at(row.simple_path),
                domain_tag=row.domain_tag,
            )
        )
    return pairs


def load_corpus(path: str | Path) -> Corpus:
    """Load a corpus directory written by :func:`save_corpus`.

    ``path`` may also point directly at the manifest file. A missing or
    empty alignment file yields empty record lists.
    """
    path = Path(path)
    manifest_path = path if path.is_file() else path / "manifest.tsv"
    pairs = load_pairs(manifest_path)
    alignments_path = manifest_path.parent / "alignments.tsv"
    records_by_pair: dict[str, list[SentenceAlignmentRecord]] = {}
    if alignments_path.exists():
        records_by_pair = load_alignments(alignments_path)
    known_ids = {pair.pair_id for pair in pairs}
    for pair_id in records_by_pair:
        if pair_id not in known_ids:
            raise ValidationError(
                f"alignment file references unknown pair_id {pair_id!r}"
            )
    corpus: Corpus = []
    for pair in pairs:
        records = records_by_pair.get(pair.pair_id, [])
        validate_alignment_set(records, pair)
        corpus.append((pair, records))
    return corpus


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus directory: manifest, alignments, and document files."""
    path = Path(path)
    docs_dir = path / "docs"
    docs_dir.mkdir(parents=True, exist_ok=True)
    written: dict[str, Document] = {}
    manifest_rows = []
    records_by_pair: dict[str, list[SentenceAlignmentRecord]] = {}
    for pair, records in corpus:
        validate_alignment_set(records, pair)
        for document in (pair.complex, pair.simple):
            previous = written.get(document.doc_id)
            if previous is None:
                _check_filename_safe(document.doc_id)
                save_document(document, docs_dir / f"{document.doc_id}.txt")
                written[document.doc_id] = document
            elif previous != document:
                raise ValidationError(
                    f"doc_id {document.doc_id!r} used for two different documents"
                )
        manifest_rows.append(
            ManifestRow(
                pair_id=pair.pair_id,
                complex_path=f"docs/{pair.complex.doc_id}.txt",
                simple_path=f"docs/{pair.simple.doc_id}.txt",
                domain_tag=pair.domain_tag,
            )
        )
        records_by_pair[pair.pair_id] = list(records)
    save_manifest(manifest_rows, path / "manifest.tsv")
    save_alignments(records_by_pair, path / "alignments.tsv")


def _check_filename_safe(doc_id: str) -> None:
    if not doc_id or any(ch in doc_id for ch in "/\\\0\n\r\t") or doc_id in (".", ".."):
        raise ValidationError(f"doc_id {doc_id!r} is not usable as a file name")
