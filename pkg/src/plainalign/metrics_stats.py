"""Simplification metrics (SARI, BLEU, German reading ease) and corpus stats.

The German reading-ease variant is ``180 - ASL - 58.5 * ASW`` where ASL is
words per sentence and ASW syllables per word. The score is deliberately
left unclamped; one-word fragments can score far outside [0, 100] (for
example ``"Anti-Semitismus."`` scores -172 and ``"Tom!"`` scores 120.5).
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from statistics import fmean, pstdev
from typing import Iterable, Mapping, Sequence

from .corpus_model import (
    AlignmentType,
    Document,
    DocumentPair,
    SentenceAlignmentRecord,
    classify_alignment_type,
)
from .errors import ValidationError
from .preprocess import segment_sentences, tokenize, word_tokens

GERMAN_VOWELS = frozenset("aeiouäöüy")


def count_syllables_de(word: str) -> int:
    """Number of maximal vowel groups in the lowercased word, at least 1."""
    lowered = word.lower()
    groups = 0
    in_group = False
    for ch in lowered:
        if ch in GERMAN_VOWELS:
            if not in_group:
                groups += 1
                in_group = True
        else:
            in_group = False
    return max(groups, 1)


def fre_from_counts(n_words: int, n_sentences: int, n_syllables: int) -> float:
    if n_words <= 0:
        raise ValidationError("reading ease needs at least one word token")
    if n_sentences <= 0:
        raise ValidationError("reading ease needs at least one sentence")
    average_sentence_length = n_words / n_sentences
    average_syllables_per_word = n_syllables / n_words
    return 180.0 - average_sentence_length - 58.5 * average_syllables_per_word


def fre_german(text: str) -> float:
    """German Flesch reading ease of a text; higher means easier."""
    sentences = segment_sentences(text)
    words: list[str] = []
    for sentence in sentences:
        words.extend(word_tokens(sentence.text))
    if not words:
        raise ValidationError("reading ease needs at least one word token")
    syllables = sum(count_syllables_de(word) for word in words)
    return fre_from_counts(len(words), len(sentences), syllables)


def document_fre(document: Document) -> float:
    """Reading ease over an already segmented document (no re-splitting)."""
    words: list[str] = []
    for sentence in document.sentences:
        words.extend(word_tokens(sentence.text))
    if not words:
        raise ValidationError(
            f"document {document.doc_id!r} has no word tokens"
        )
    syllables = sum(count_syllables_de(word) for word in words)
    return fre_from_counts(len(words), len(document.sentences), syllables)


# ---------------------------------------------------------------------------
# SARI and BLEU


def _metric_tokens(text: str) -> list[str]:
    return [token.text.lower() for token in tokenize(text)]


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter[tuple[str, ...]]:
    return Counter(
        tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)
    )


def _ratio(numerator: int, denominator: int) -> float:
    """numerator / denominator, treating an empty denominator as perfect."""
    if denominator == 0:
        return 1.0
    return numerator / denominator


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _sari_sentence(source: str, output: str, reference: str) -> float:
    source_tokens = _metric_tokens(source)
    output_tokens = _metric_tokens(output)
    reference_tokens = _metric_tokens(reference)
    total = 0.0
    for n in range(1, 5):
        s = _ngram_counts(source_tokens, n)
        o = _ngram_counts(output_tokens, n)
        r = _ngram_counts(reference_tokens, n)

        kept = s & o
        keep_target = s & r
        keep_correct = kept & r
        keep_p = _ratio(sum(keep_correct.values()), sum(kept.values()))
        keep_r = _ratio(sum(keep_correct.values()), sum(keep_target.values()))

        added = o - s
        add_target = r - s
        add_correct = added & add_target
        add_p = _ratio(sum(add_correct.values()), sum(added.values()))
        add_r = _ratio(sum(add_correct.values()), sum(add_target.values()))

        deleted = s - o
        delete_target = s - r
        delete_correct = deleted & delete_target
        delete_p = _ratio(sum(delete_correct.values()), sum(deleted.values()))

        total += (_f1(keep_p, keep_r) + _f1(add_p, add_r) + delete_p) / 3.0
    return total / 4.0


def sari(
    sources: Sequence[str], outputs: Sequence[str], references: Sequence[str]
) -> float:
    """SARI in [0, 100] with a single reference per item.

    Per sentence and n-gram order 1..4 this scores what was kept, added,
    and deleted relative to source and reference (F1 for keep and add,
    precision for delete), averages the orders, and then averages over the
    corpus. An output equal to its reference scores 100.
    """
    if not (len(sources) == len(outputs) == len(references)):
        raise ValidationError(
            "sources, outputs, and references must have equal lengths, got "
            f"{len(sources)}/{len(outputs)}/{len(references)}"
        )
    if not sources:
        raise ValidationError("SARI is undefined for an empty corpus")
    return 100.0 * fmean(
        _sari_sentence(src, out, ref)
        for src, out, ref in zip(sources, outputs, references)
    )


def bleu(outputs: Sequence[str], references: Sequence[str]) -> float:
    """Corpus BLEU in [0, 100]: orders 1..4, brevity penalty, no smoothing.

    An n-gram order with no output n-grams at all counts as perfect; any
    order with output n-grams but zero matches sends the score to 0.
    """
    if len(outputs) != len(references):
        raise ValidationError(
            f"outputs and references must have equal lengths, got "
            f"{len(outputs)}/{len(references)}"
        )
    if not outputs:
        raise ValidationError("BLEU is undefined for an empty corpus")
    matches = [0] * 4
    totals = [0] * 4
    output_length = 0
    reference_length = 0
    for output, reference in zip(outputs, references):
        output_tokens = _metric_tokens(output)
        reference_tokens = _metric_tokens(reference)
        output_length += len(output_tokens)
        reference_length += len(reference_tokens)
        for n in range(1, 5):
            out_ngrams = _ngram_counts(output_tokens, n)
            ref_ngrams = _ngram_counts(reference_tokens, n)
            totals[n - 1] += sum(out_ngrams.values())
            matches[n - 1] += sum((out_ngrams & ref_ngrams).values())
    if output_length == 0:
        return 0.0
    precisions = [
        (matches[i] / totals[i]) if totals[i] else 1.0 for i in range(4)
    ]
    if any(p == 0.0 for p in precisions):
        return 0.0
    brevity = (
        1.0
        if output_length >= reference_length
        else math.exp(1.0 - reference_length / output_length)
    )
    return 100.0 * brevity * math.exp(fmean(math.log(p) for p in precisions))


@dataclass(frozen=True)
class MetricReport:
    """Scores for one system-output set."""

    sari: float
    bleu: float
    fre: float
    n_items: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.sari <= 100.0:
            raise ValidationError(f"sari must be in [0, 100], got {self.sari}")
        if not 0.0 <= self.bleu <= 100.0:
            raise ValidationError(f"bleu must be in [0, 100], got {self.bleu}")


def metric_report(
    sources: Sequence[str], outputs: Sequence[str], references: Sequence[str]
) -> MetricReport:
    """SARI/BLEU against the references plus reading ease of the outputs."""
    return MetricReport(
        sari=sari(sources, outputs, references),
        bleu=bleu(outputs, references),
        fre=fre_german("\n\n".join(outputs)),
        n_items=len(outputs),
    )


# ---------------------------------------------------------------------------
# Corpus statistics


@dataclass(frozen=True)
class CorpusStatsTable:
    """Alignment-type counts and per-side length and reading-ease stats."""

    type_counts: Mapping[AlignmentType, int]
    n_records: int
    n_pairs: int
    complex_length_mean: float
    complex_length_std: float
    simple_length_mean: float
    simple_length_std: float
    complex_fre_mean: float
    complex_fre_std: float
    simple_fre_mean: float
    simple_fre_std: float

    def __post_init__(self) -> None:
        if sum(self.type_counts.values()) != self.n_records:
            raise ValidationError("alignment type counts must sum to record count")

    def to_tsv(self) -> str:
        lines = ["statistic\tvalue"]
        lines.append(f"n_pairs\t{self.n_pairs}")
        lines.append(f"n_records\t{self.n_records}")
        for alignment_type in AlignmentType:
            lines.append(
                f"count_{alignment_type.value}\t"
                f"{self.type_counts.get(alignment_type, 0)}"
            )
        for name in (
            "complex_length_mean",
            "complex_length_std",
            "simple_length_mean",
            "simple_length_std",
            "complex_fre_mean",
            "complex_fre_std",
            "simple_fre_mean",
            "simple_fre_std",
        ):
            lines.append(f"{name}\t{getattr(self, name):.3f}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        payload = {
            "n_pairs": self.n_pairs,
            "n_records": self.n_records,
            "type_counts": {
                alignment_type.value: self.type_counts.get(alignment_type, 0)
                for alignment_type in AlignmentType
            },
            "complex_length_mean": self.complex_length_mean,
            "complex_length_std": self.complex_length_std,
            "simple_length_mean": self.simple_length_mean,
            "simple_length_std": self.simple_length_std,
            "complex_fre_mean": self.complex_fre_mean,
            "complex_fre_std": self.complex_fre_std,
            "simple_fre_mean": self.simple_fre_mean,
            "simple_fre_std": self.simple_fre_std,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 0.0
    if len(values) == 1:
        return values[0], 0.0
    return fmean(values), pstdev(values)


def corpus_stats(
    corpus: Iterable[tuple[DocumentPair, Sequence[SentenceAlignmentRecord]]],
) -> CorpusStatsTable:
    """Alignment-type counts plus sentence-length and reading-ease stats.

    Lengths are word-token counts over every document sentence per side;
    reading ease is computed per document from its existing segmentation.
    """
    type_counts: Counter[AlignmentType] = Counter()
    complex_lengths: list[float] = []
    simple_lengths: list[float] = []
    complex_fres: list[float] = []
    simple_fres: list[float] = []
    n_records = 0
    n_pairs = 0
    for pair, records in corpus:
        n_pairs += 1
        for record in records:
            type_counts[classify_alignment_type(record, pair)] += 1
            n_records += 1
        for sentence in pair.complex.sentences:
            complex_lengths.append(float(len(word_tokens(sentence.text))))
        for sentence in pair.simple.sentences:
            simple_lengths.append(float(len(word_tokens(sentence.text))))
        complex_fres.append(document_fre(pair.complex))
        simple_fres.append(document_fre(pair.simple))
    complex_length_mean, complex_length_std = _mean_std(complex_lengths)
    simple_length_mean, simple_length_std = _mean_std(simple_lengths)
    complex_fre_mean, complex_fre_std = _mean_std(complex_fres)
    simple_fre_mean, simple_fre_std = _mean_std(simple_fres)
    return CorpusStatsTable(
        type_counts=dict(type_counts),
        n_records=n_records,
        n_pairs=n_pairs,
        complex_length_mean=complex_length_mean,
        complex_length_std=complex_length_std,
        simple_length_mean=simple_length_mean,
        simple_length_std=simple_length_std,
        complex_fre_mean=complex_fre_mean,
        complex_fre_std=complex_fre_std,
        simple_fre_mean=simple_fre_mean,
        simple_fre_std=simple_fre_std,
    )
