"""Score predicted alignments against gold, plus annotator agreement.

Alignment quality is framed as binary classification over expanded
(complex index, simple index) pairs: a pair is either aligned or it is
not. Reports carry precision, recall, F1, and an F-beta that can weigh
precision more heavily (beta < 1).
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus_model import (
    AlignmentType,
    AnnotationLabel,
    DocumentPair,
    SentenceAlignmentRecord,
    classify_alignment_type,
    expand_to_pairs,
)
from .errors import ValidationError

SUBSETS = ("all", "one_to_one", "n_to_m")


def f_beta_score(precision: float, recall: float, beta: float) -> float:
    """(1 + beta^2) * P * R / (beta^2 * P + R); 0 when both are 0."""
    if precision == 0.0 and recall == 0.0:
        return 0.0
    beta_sq = beta * beta
    denominator = beta_sq * precision + recall
    if denominator == 0.0:
        return 0.0
    return (1 + beta_sq) * precision * recall / denominator


@dataclass(frozen=True)
class AlignmentEvalReport:
    """Pairwise classification counts and derived scores."""

    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    f_beta: float
    beta: float = 0.5
    subset: str = "all"

    @classmethod
    def from_counts(
        cls, tp: int, fp: int, fn: int, beta: float = 0.5, subset: str = "all"
    ) -> "AlignmentEvalReport":
        if subset not in SUBSETS:
            raise ValidationError(f"subset must be one of {SUBSETS}, got {subset!r}")
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        return cls(
            tp=tp,
            fp=fp,
            fn=fn,
            precision=precision,
            recall=recall,
            f1=f_beta_score(precision, recall, 1.0),
            f_beta=f_beta_score(precision, recall, beta),
            beta=beta,
            subset=subset,
        )

    def as_dict(self) -> dict:
        return {
            "subset": self.subset,
            "beta": self.beta,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "f_beta": self.f_beta,
        }

    def to_tsv(self) -> str:
        header = "subset\tbeta\ttp\tfp\tfn\tprecision\trecall\tf1\tf_beta"
        row = (
            f"{self.subset}\t{self.beta:g}\t{self.tp}\t{self.fp}\t{self.fn}"
            f"\t{self.precision:.3f}\t{self.recall:.3f}\t{self.f1:.3f}"
            f"\t{self.f_beta:.3f}"
        )
        return header + "\n" + row + "\n"

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"


def _is_one_to_one(record: SentenceAlignmentRecord) -> bool:
    return len(record.complex_indices) == 1 and len(record.simple_indices) == 1


def _is_n_to_m(record: SentenceAlignmentRecord) -> bool:
    return len(record.complex_indices) > 1 or len(record.simple_indices) > 1


def evaluate_alignment(
    gold: Sequence[SentenceAlignmentRecord],
    pred: Sequence[SentenceAlignmentRecord],
    subset: str = "all",
    beta: float = 0.5,
) -> AlignmentEvalReport:
    """Pairwise precision/recall of predicted against gold records.

    With a restricted ``subset`` the gold side is limited to pairs coming
    from records of that arity (1:1 or n:m), while false positives are
    still judged against the full gold set; a prediction that correctly
    hits a gold pair of the other arity class is neither rewarded nor
    punished. Deletion and addition records expand to no pairs and never
    contribute.
    """
    if subset not in SUBSETS:
        raise ValidationError(f"subset must be one of {SUBSETS}, got {subset!r}")
    gold_full: set[tuple[int, int]] = set()
    gold_subset: set[tuple[int, int]] = set()
    for record in gold:
        pairs = expand_to_pairs(record)
        gold_full |= pairs
        if (
            subset == "all"
            or (subset == "one_to_one" and _is_one_to_one(record))
            or (subset == "n_to_m" and _is_n_to_m(record))
        ):
            gold_subset |= pairs
    predicted: set[tuple[int, int]] = set()
    for record in pred:
        predicted |= expand_to_pairs(record)
    tp = len(predicted & gold_subset)
    fp = len(predicted - gold_full)
    fn = len(gold_subset - predicted)
    return AlignmentEvalReport.from_counts(tp, fp, fn, beta=beta, subset=subset)


def evaluate_corpus(
    gold_by_pair: Mapping[str, Sequence[SentenceAlignmentRecord]],
    pred_by_pair: Mapping[str, Sequence[SentenceAlignmentRecord]],
    subset: str = "all",
    beta: float = 0.5,
    pairs: Mapping[str, DocumentPair] | None = None,
    exclude_identical: bool = False,
) -> AlignmentEvalReport:
    """Aggregate pairwise counts over a whole corpus.

    Sentence index pairs are namespaced by pair_id before counting, so
    per-document counts simply sum. ``exclude_identical`` drops the
    expanded pairs of gold records whose two sentences are textually
    identical from both sides of the comparison; it requires ``pairs``.
    """
    unknown = set(pred_by_pair) - set(gold_by_pair)
    if unknown:
        raise ValidationError(
            f"predictions reference unknown pair_id(s): {sorted(unknown)}"
        )
    if exclude_identical and pairs is None:
        raise ValidationError(
            "exclude_identical requires the document pairs to compare texts"
        )
    tp = fp = fn = 0
    for pair_id, gold_records in gold_by_pair.items():
        pred_records = pred_by_pair.get(pair_id, [])
        if exclude_identical:
            assert pairs is not None
            document_pair = pairs.get(pair_id)
            if document_pair is None:
                raise ValidationError(f"no document pair for pair_id {pair_id!r}")
            ignored: set[tuple[int, int]] = set()
            remaining_gold = []
            for record in gold_records:
                if (
                    classify_alignment_type(record, document_pair)
                    is AlignmentType.IDENTICAL
                ):
                    ignored |= expand_to_pairs(record)
                else:
                    remaining_gold.append(record)
            gold_records = remaining_gold
            pred_records = _strip_pairs(pred_records, ignored)
        report = evaluate_alignment(gold_records, pred_records, subset=subset, beta=beta)
        tp += report.tp
        fp += report.fp
        fn += report.fn
    return AlignmentEvalReport.from_counts(tp, fp, fn, beta=beta, subset=subset)


def _strip_pairs(
    records: Sequence[SentenceAlignmentRecord], ignored: set[tuple[int, int]]
) -> list[SentenceAlignmentRecord]:
    kept = []
    for record in records:
        remaining = expand_to_pairs(record) - ignored
        if not remaining and expand_to_pairs(record):
            continue
        if remaining == expand_to_pairs(record):
            kept.append(record)
        else:
            for c, s in sorted(remaining):
                kept.append(SentenceAlignmentRecord((c,), (s,)))
    return kept


@dataclass(frozen=True)
class AgreementReport:
    """Cohen's kappa between two annotators over the same items."""

    kappa: float
    observed_agreement: float
    n_items: int
    per_domain: dict[str, tuple[float, int]] = field(default_factory=dict)


def _kappa(labels_a: Sequence[AnnotationLabel], labels_b: Sequence[AnnotationLabel]) -> tuple[float, float]:
    n = len(labels_a)
    observed = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    marginals_a = Counter(labels_a)
    marginals_b = Counter(labels_b)
    expected = sum(
        (marginals_a[label] / n) * (marginals_b[label] / n) for label in marginals_a
    )
    if expected >= 1.0:
        # Both annotators constant: chance correction is undefined.
        return 0.0, observed
    return (observed - expected) / (1.0 - expected), observed


def cohen_kappa(
    labels_a: Sequence[AnnotationLabel],
    labels_b: Sequence[AnnotationLabel],
    domains: Sequence[str] | None = None,
) -> AgreementReport:
    """Chance-corrected agreement over parallel label lists.

    ``domains`` may give one domain tag per item; per-domain kappas are
    then computed on the domain-filtered sublists (with at least 2 items).
    """
    if len(labels_a) != len(labels_b):
        raise ValidationError(
            f"label lists differ in length: {len(labels_a)} vs {len(labels_b)}"
        )
    if len(labels_a) < 2:
        raise ValidationError("kappa is undefined for fewer than 2 items")
    if domains is not None and len(domains) != len(labels_a):
        raise ValidationError(
            f"domains list differs in length: {len(domains)} vs {len(labels_a)}"
        )
    kappa, observed = _kappa(labels_a, labels_b)
    per_domain: dict[str, tuple[float, int]] = {}
    if domains is not None:
        for tag in sorted(set(domains)):
            sub_a = [a for a, d in zip(labels_a, domains) if d == tag]
            sub_b = [b for b, d in zip(labels_b, domains) if d == tag]
            if len(sub_a) >= 2:
                domain_kappa, _ = _kappa(sub_a, sub_b)
                per_domain[tag] = (domain_kappa, len(sub_a))
    return AgreementReport(
        kappa=kappa,
        observed_agreement=observed,
        n_items=len(labels_a),
        per_domain=per_domain,
    )


def build_combination_labels(
    gold: Sequence[SentenceAlignmentRecord], pair: DocumentPair
) -> list[AnnotationLabel]:
    """One label per (complex, simple) combination, row-major order."""
    aligned: set[tuple[int, int]] = set()
    for record in gold:
        aligned |= expand_to_pairs(record)
    labels = []
    for i in range(len(pair.complex.sentences)):
        for j in range(len(pair.simple.sentences)):
            labels.append(
                AnnotationLabel.ALIGNED
                if (i, j) in aligned
                else AnnotationLabel.NOT_ALIGNED
            )
    return labels
