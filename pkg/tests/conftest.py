"""Shared fixture builders for the test suite."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

from plainalign.corpus_model import (
    Document,
    DocumentPair,
    Sentence,
    SentenceAlignmentRecord,
)

DATA_DIR = Path(__file__).parent / "data"

CONSONANTS = "bdfghklmnprstvwz"
VOWELS = "aeiou"


def make_document(doc_id: str, paragraphs: list[list[str]], **meta) -> Document:
    sentences = []
    for paragraph_index, paragraph in enumerate(paragraphs):
        for text in paragraph:
            sentences.append(
                Sentence(
                    index=len(sentences),
                    text=text,
                    paragraph_index=paragraph_index,
                )
            )
    return Document(doc_id=doc_id, sentences=tuple(sentences), **meta)


def make_pair(
    pair_id: str,
    complex_paragraphs: list[list[str]],
    simple_paragraphs: list[list[str]],
    domain_tag: str = "other",
) -> DocumentPair:
    return DocumentPair(
        pair_id=pair_id,
        complex=make_document(f"{pair_id}-complex", complex_paragraphs),
        simple=make_document(f"{pair_id}-simple", simple_paragraphs),
        domain_tag=domain_tag,
    )


def _pseudo_word(rng: random.Random) -> str:
    return "".join(
        rng.choice(CONSONANTS) + rng.choice(VOWELS)
        for _ in range(rng.randint(2, 4))
    )


def _fresh_words(rng: random.Random, n: int, used: set[str]) -> list[str]:
    words = []
    while len(words) < n:
        word = _pseudo_word(rng)
        if word not in used:
            used.add(word)
            words.append(word)
    return words


def _sentence_text(words: list[str]) -> str:
    return " ".join(words).capitalize() + "."


def generate_planted_pair(
    rng: random.Random, pair_id: str
) -> tuple[DocumentPair, list[SentenceAlignmentRecord]]:
    """One synthetic document pair with known 1:1, 1:2, and 2:1 alignments.

    Aligned sentences share content words; every sentence also carries
    unique filler words, and occasional deletions/additions interrupt the
    staircase. The returned records are the plant oracle.
    """
    used: set[str] = set()
    complex_items: list[tuple[str, int]] = []
    simple_items: list[tuple[str, int]] = []
    gold: list[SentenceAlignmentRecord] = []
    c_idx = s_idx = 0
    for paragraph in range(3):
        last_was_gap = False
        for _ in range(rng.randint(3, 5)):
            roll = rng.random()
            if roll < 0.60 or (roll >= 0.92 and last_was_gap):
                kind = "one"
            elif roll < 0.80:
                kind = "split"
            elif roll < 0.92:
                kind = "merge"
            elif roll < 0.96:
                kind = "delete"
            else:
                kind = "add"
            last_was_gap = kind in ("delete", "add")
            if kind == "one":
                content = _fresh_words(rng, 6, used)
                complex_items.append(
                    (_sentence_text(content + _fresh_words(rng, 1, used)), paragraph)
                )
                simple_items.append(
                    (_sentence_text(content + _fresh_words(rng, 1, used)), paragraph)
                )
                gold.append(SentenceAlignmentRecord((c_idx,), (s_idx,)))
                c_idx += 1
                s_idx += 1
            elif kind == "split":
                content = _fresh_words(rng, 8, used)
                complex_items.append((_sentence_text(content), paragraph))
                simple_items.append(
                    (_sentence_text(content[:4] + _fresh_words(rng, 1, used)), paragraph)
                )
                simple_items.append(
                    (_sentence_text(content[4:] + _fresh_words(rng, 1, used)), paragraph)
                )
                gold.append(SentenceAlignmentRecord((c_idx,), (s_idx, s_idx + 1)))
                c_idx += 1
                s_idx += 2
            elif kind == "merge":
                first = _fresh_words(rng, 4, used)
                second = _fresh_words(rng, 4, used)
                complex_items.append(
                    (_sentence_text(first + _fresh_words(rng, 1, used)), paragraph)
                )
                complex_items.append(
                    (_sentence_text(second + _fresh_words(rng, 1, used)), paragraph)
                )
                simple_items.append((_sentence_text(first + second), paragraph))
                gold.append(SentenceAlignmentRecord((c_idx, c_idx + 1), (s_idx,)))
                c_idx += 2
                s_idx += 1
            elif kind == "delete":
                complex_items.append(
                    (_sentence_text(_fresh_words(rng, 6, used)), paragraph)
                )
                c_idx += 1
            else:
                simple_items.append(
                    (_sentence_text(_fresh_words(rng, 6, used)), paragraph)
                )
                s_idx += 1

    def build(doc_id: str, items: list[tuple[str, int]]) -> Document:
        return Document(
            doc_id=doc_id,
            sentences=tuple(
                Sentence(index=i, text=text, paragraph_index=p)
                for i, (text, p) in enumerate(items)
            ),
        )

    pair = DocumentPair(
        pair_id=pair_id,
        complex=build(f"{pair_id}-complex", complex_items),
        simple=build(f"{pair_id}-simple", simple_items),
    )
    return pair, gold


def generate_planted_corpus(
    seed: int, n_documents: int
) -> list[tuple[DocumentPair, list[SentenceAlignmentRecord]]]:
    rng = random.Random(seed)
    return [
        generate_planted_pair(rng, f"planted-{k:03d}") for k in range(n_documents)
    ]


@pytest.fixture(scope="session")
def planted_corpus():
    return generate_planted_corpus(seed=20240817, n_documents=30)
