"""Toolkit for building, aligning, cleaning, and evaluating German
complex/simplified parallel text corpora."""

from .corpus_model import (
    AlignmentType,
    AnnotationLabel,
    Document,
    DocumentPair,
    Sentence,
    SentenceAlignmentRecord,
    classify_alignment_type,
    expand_to_pairs,
    load_corpus,
    save_corpus,
)
from .errors import (
    ConfigurationError,
    ExtractionError,
    FormatError,
    PlainalignError,
    TransportError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentType",
    "AnnotationLabel",
    "ConfigurationError",
    "Document",
    "DocumentPair",
    "ExtractionError",
    "FormatError",
    "PlainalignError",
    "Sentence",
    "SentenceAlignmentRecord",
    "TransportError",
    "ValidationError",
    "classify_alignment_type",
    "expand_to_pairs",
    "load_corpus",
    "save_corpus",
    "__version__",
]
