"""Sentence segmentation, tokenization, and cleaning of aligned pairs."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus_model import Sentence
from .errors import ValidationError

TERMINATORS = ".!?"

QUOTE_CHARS = frozenset("\"'„“”‚‘’«»‹›")

# Dotted forms that never end a sentence. Extendable via a list file,
# see load_abbreviations().
DEFAULT_ABBREVIATIONS = (
    "z.B.",
    "bzw.",
    "Dr.",
    "Nr.",
    "ca.",
    "Abb.",
    "Abs.",
    "Art.",
    "bspw.",
    "bzgl.",
    "d.h.",
    "etc.",
    "evtl.",
    "ggf.",
    "Hr.",
    "Fr.",
    "inkl.",
    "Mio.",
    "Mrd.",
    "Prof.",
    "S.",
    "sog.",
    "St.",
    "Str.",
    "u.a.",
    "usw.",
    "u.U.",
    "vgl.",
    "z.T.",
)


@dataclass(frozen=True)
class Token:
    """A word or punctuation unit of a sentence."""

    text: str
    is_word: bool


@dataclass(frozen=True)
class CleaningReport:
    """Counts of removed and kept aligned pairs, one cause per pair."""

    removed_short: int
    removed_near_identical: int
    removed_duplicates: int
    kept: int

    def __post_init__(self) -> None:
        for name in ("removed_short", "removed_near_identical", "removed_duplicates", "kept"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")

    @property
    def total(self) -> int:
        return (
            self.removed_short
            + self.removed_near_identical
            + self.removed_duplicates
            + self.kept
        )


def load_abbreviations(path: str | Path) -> frozenset[str]:
    """Read one abbreviation per line; ``#`` starts a comment."""
    entries = set()
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.split("#", 1)[0].strip()
            if line:
                entries.add(line.lower())
    return frozenset(entries)


def _prepare_abbreviations(abbreviations: Iterable[str] | None) -> frozenset[str]:
    if abbreviations is None:
        abbreviations = DEFAULT_ABBREVIATIONS
    return frozenset(entry.lower() for entry in abbreviations)


def _is_abbreviation(text: str, dot_index: int, abbreviations: frozenset[str]) -> bool:
    start = dot_index
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    chunk = text[start : dot_index + 1]
    while chunk and not chunk[0].isalnum():
        chunk = chunk[1:]
    return chunk.lower() in abbreviations


def _split_paragraph(text: str, abbreviations: frozenset[str]) -> list[str]:
    pieces: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in TERMINATORS:
            j = i + 1
            if j < n and text[j].isspace():
                k = j
                while k < n and text[k].isspace():
                    k += 1
                follows_trigger = k < n and (
                    text[k].isupper() or text[k].isdigit() or text[k] in QUOTE_CHARS
                )
                if follows_trigger and not (
                    ch == "." and _is_abbreviation(text, i, abbreviations)
                ):
                    pieces.append(text[start : i + 1])
                    start = k
                    i = k
                    continue
        i += 1
    tail = text[start:]
    if tail.strip():
        pieces.append(tail)
    return [" ".join(piece.split()) for piece in pieces]


def segment_sentences(
    text: str, abbreviations: Iterable[str] | None = None
) -> list[Sentence]:
    """Split raw text into sentences with paragraph structure.

    A terminator (``.``, ``!``, ``?``) ends a sentence when followed by
    whitespace and then an uppercase letter, a quote character, or a digit;
    abbreviations suppress the split. Blank lines always end both the
    sentence and the paragraph. Whitespace inside a sentence is collapsed
    to single spaces; non-whitespace characters are never dropped.
    """
    prepared = _prepare_abbreviations(abbreviations)
    sentences: list[Sentence] = []
    paragraph_index = 0
    current: list[str] = []

    def flush_paragraph() -> None:
        nonlocal paragraph_index
        if not current:
            return
        paragraph_text = "\n".join(current)
        current.clear()
        pieces = _split_paragraph(paragraph_text, prepared)
        if not pieces:
            return
        for piece in pieces:
            sentences.append(
                Sentence(
                    index=len(sentences),
                    text=piece,
                    paragraph_index=paragraph_index,
                )
            )
        paragraph_index += 1

    for line in text.split("\n"):
        if line.strip():
            current.append(line)
        else:
            flush_paragraph()
    flush_paragraph()
    return sentences


def tokenize(sentence: str) -> list[Token]:
    """Whitespace split with leading and trailing punctuation peeled off.

    Interior punctuation (hyphens of compounds, abbreviation dots) stays
    inside the word token.
    """
    tokens: list[Token] = []
    for chunk in sentence.split():
        leading: list[str] = []
        while chunk and not chunk[0].isalnum():
            leading.append(chunk[0])
            chunk = chunk[1:]
        trailing: list[str] = []
        while chunk and not chunk[-1].isalnum():
            trailing.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(Token(ch, False) for ch in leading)
        if chunk:
            tokens.append(Token(chunk, True))
        tokens.extend(Token(ch, False) for ch in reversed(trailing))
    return tokens


def word_tokens(sentence: str) -> list[str]:
    return [token.text for token in tokenize(sentence) if token.is_word]


def word_count(sentence: str) -> int:
    return len(word_tokens(sentence))


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit-cost insert, delete, and substitute."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ch_a in enumerate(a, start=1):
        current = [i]
        for j, ch_b in enumerate(b, start=1):
            cost = 0 if ch_a == ch_b else 1
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
            )
        previous = current
    return previous[-1]


# (complex_text, simple_text, origin); origin is opaque to the cleaner.
AlignedTextPair = tuple[str, str, object]


def clean_aligned_pairs(
    pairs: Sequence[AlignedTextPair],
) -> tuple[list[AlignedTextPair], CleaningReport]:
    """Drop unusable aligned sentence pairs.

    A pair ``(complex_text, simple_text, origin_doc)`` is removed when

    1. either side has at most one word token (wrongly split fragments),
    2. the two sides differ by an edit distance of at most 1, or
    3. the exact text pair was already seen in any document (the first
       occurrence is kept).

    The first matching rule wins; the report counts each cause. Cleaning
    already-cleaned output removes nothing.
    """
    kept: list[AlignedTextPair] = []
    seen: set[tuple[str, str]] = set()
    removed_short = removed_near_identical = removed_duplicates = 0
    for entry in pairs:
        complex_text, simple_text, _origin = entry
        if word_count(complex_text) <= 1 or word_count(simple_text) <= 1:
            removed_short += 1
            continue
        if _near_identical(complex_text, simple_text):
            removed_near_identical += 1
            continue
        key = (complex_text, simple_text)
        if key in seen:
            removed_duplicates += 1
            continue
        seen.add(key)
        kept.append(entry)
    report = CleaningReport(
        removed_short=removed_short,
        removed_near_identical=removed_near_identical,
        removed_duplicates=removed_duplicates,
        kept=len(kept),
    )
    return kept, report


def _near_identical(a: str, b: str) -> bool:
    if abs(len(a) - len(b)) > 1:
        return False
    return levenshtein(a, b) <= 1
