"""Automatic sentence aligners over a document pair.

Three aligners share one output contract, a list of
:class:`~plainalign.corpus_model.SentenceAlignmentRecord`:

* :func:`align_massalign` walks a TF-IDF similarity matrix greedily, first
  over paragraphs and then over sentences inside each aligned paragraph
  group, and can emit 1:1, 1:n, and n:1 records.
* :func:`align_cats_c3g` matches every complex sentence to its most similar
  simple sentence via character-trigram cosine and emits 1:1 records.
* :func:`align_embed_threshold` does the same with externally computed
  sentence embeddings read from files, matching from the simple side.

Thresholds act as pure filters: the search trajectories never depend on
them, so raising any threshold can only remove aligned sentence pairs.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus_model import DocumentPair, Sentence, SentenceAlignmentRecord
from .errors import ConfigurationError, FormatError, ValidationError
from .preprocess import word_tokens

GERMAN_STOPWORDS = frozenset(
    """
    aber alle allem allen aller alles als also am an andere anderen ander
    auch auf aus bei beim bin bis bist da damit dann das dass dem den denn
    der des dessen die dies diese diesem diesen dieser dieses doch dort du
    durch ein eine einem einen einer eines er es etwas für gegen hab habe
    haben hat hatte hatten hier hin hinter ich ihm ihn ihnen ihr ihre ihrem
    ihren ihrer ihres im in ist ja jede jedem jeden jeder jedes kann kein
    keine keinem keinen keiner können man mehr mein mich mir mit muss nach
    nicht noch nun nur ob oder ohne schon sehr sein seine seinem seinen
    seiner sich sie sind so sondern um und uns unser unter vom von vor war
    waren was weil weiter welche wenn werden wie wieder wir wird wo wurde
    wurden zu zum zur über
    """.split()
)


@dataclass(frozen=True)
class AlignerConfig:
    """Tunable knobs shared by the aligners.

    All thresholds live in [0, 1]. ``vicinity_radius`` bounds how far the
    similarity-matrix walk may jump in one step, which is what lets it skip
    over deleted or added sentences.
    """

    embed_threshold: float = 0.9
    cats_threshold: float = 0.5
    vicinity_radius: int = 3
    merge_threshold: float = 0.35
    stopword_list: frozenset[str] = GERMAN_STOPWORDS
    mutual_best: bool = False

    def __post_init__(self) -> None:
        for name in ("embed_threshold", "cats_threshold", "merge_threshold"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"{name} must be in [0, 1], got {value}")
        if self.vicinity_radius < 0:
            raise ConfigurationError(
                f"vicinity_radius must be >= 0, got {self.vicinity_radius}"
            )


# ---------------------------------------------------------------------------
# TF-IDF


class TfIdfModel:
    """TF-IDF weights fitted over the sentences being aligned.

    ``idf(term) = ln((1 + N) / (1 + df(term))) + 1`` with N the fitted
    sentence count. Unseen terms are smoothed with df = 0, so every idf is
    strictly positive. Terms are lowercased word tokens minus stopwords.
    """

    def __init__(
        self,
        document_frequency: Mapping[str, int],
        n_fitted: int,
        stopwords: frozenset[str] = GERMAN_STOPWORDS,
    ) -> None:
        self.n_fitted = n_fitted
        self.stopwords = stopwords
        self._df = dict(document_frequency)
        self.vocabulary = {
            term: column for column, term in enumerate(sorted(self._df))
        }

    @classmethod
    def fit(
        cls, sentences: Iterable[str], stopwords: frozenset[str] = GERMAN_STOPWORDS
    ) -> "TfIdfModel":
        document_frequency: Counter[str] = Counter()
        n_fitted = 0
        for text in sentences:
            n_fitted += 1
            document_frequency.update(set(_terms(text, stopwords)))
        return cls(document_frequency, n_fitted, stopwords)

    def idf(self, term: str) -> float:
        df = self._df.get(term, 0)
        return math.log((1 + self.n_fitted) / (1 + df)) + 1.0

    def vector(self, text: str) -> dict[str, float]:
        """L2-normalized tf*idf vector of a sentence or paragraph."""
        counts = Counter(_terms(text, self.stopwords))
        weights = {term: count * self.idf(term) for term, count in counts.items()}
        norm = math.sqrt(sum(weight * weight for weight in weights.values()))
        if norm == 0.0:
            return {}
        return {term: weight / norm for term, weight in weights.items()}


def _terms(text: str, stopwords: frozenset[str]) -> list[str]:
    return [
        token.lower() for token in word_tokens(text) if token.lower() not in stopwords
    ]


def _sparse_cosine(a: Mapping[str, float], b: Mapping[str, float]) -> float:
    if len(a) > len(b):
        a, b = b, a
    value = sum(weight * b.get(term, 0.0) for term, weight in a.items())
    return min(max(value, 0.0), 1.0)


def tfidf_cosine(model: TfIdfModel, a: Sentence | str, b: Sentence | str) -> float:
    """Cosine of the two sentences' normalized tf*idf vectors, in [0, 1]."""
    text_a = a.text if isinstance(a, Sentence) else a
    text_b = b.text if isinstance(b, Sentence) else b
    return _sparse_cosine(model.vector(text_a), model.vector(text_b))


@dataclass(frozen=True)
class SimilarityMatrix:
    """Dense complex x simple similarity grid with entries in [0, 1]."""

    values: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        widths = {len(row) for row in self.values}
        if len(widths) > 1:
            raise ValidationError("similarity matrix rows must have equal length")
        for row in self.values:
            for value in row:
                if not -1e-9 <= value <= 1.0 + 1e-9:
                    raise ValidationError(
                        f"similarity {value} outside [0, 1] tolerance"
                    )

    @property
    def n_rows(self) -> int:
        return len(self.values)

    @property
    def n_cols(self) -> int:
        return len(self.values[0]) if self.values else 0

    def at(self, row: int, col: int) -> float:
        return self.values[row][col]

    @classmethod
    def build(
        cls, model: TfIdfModel, row_texts: Sequence[str], col_texts: Sequence[str]
    ) -> "SimilarityMatrix":
        row_vectors = [model.vector(text) for text in row_texts]
        col_vectors = [model.vector(text) for text in col_texts]
        return cls(
            tuple(
                tuple(_sparse_cosine(rv, cv) for cv in col_vectors)
                for rv in row_vectors
            )
        )


# ---------------------------------------------------------------------------
# Vicinity walk shared by both MASSAlign-style stages


def _vicinity_path(matrix: SimilarityMatrix, radius: int) -> list[tuple[int, int]]:
    """Greedy monotone walk over the matrix starting at (0, 0).

    While any of the three unit moves (right, down, diagonal) carries a
    positive similarity the walk takes the best of them, ties preferring
    the diagonal and then moving right. When all unit moves are dead it
    searches the forward box within ``vicinity_radius`` for the most
    similar cell and jumps there, which is what carries the walk across
    deleted or added sentences; a dead box advances one diagonal step.
    Every visited cell is returned in walk order.
    """
    if matrix.n_rows == 0 or matrix.n_cols == 0:
        return []
    path = [(0, 0)]
    row, col = 0, 0
    while True:
        unit_best: tuple[float, int, int] | None = None
        unit_cell: tuple[int, int] | None = None
        for d_row, d_col, rank in ((1, 1, 2), (0, 1, 1), (1, 0, 0)):
            r, c = row + d_row, col + d_col
            if r >= matrix.n_rows or c >= matrix.n_cols:
                continue
            key = (matrix.at(r, c), 1 if d_row == d_col else 0, rank)
            if unit_best is None or key > unit_best:
                unit_best = key
                unit_cell = (r, c)
        if unit_cell is None:
            return path
        if unit_best is not None and unit_best[0] > 0.0:
            row, col = unit_cell
            path.append(unit_cell)
            continue
        jump_best: tuple[float, int, int, int] | None = None
        jump_cell: tuple[int, int] | None = None
        for d_row in range(0, radius + 1):
            for d_col in range(0, radius + 1):
                if d_row == 0 and d_col == 0:
                    continue
                r, c = row + d_row, col + d_col
                if r >= matrix.n_rows or c >= matrix.n_cols:
                    continue
                key = (
                    matrix.at(r, c),
                    -(d_row + d_col),
                    1 if d_row == d_col else 0,
                    -d_row,
                )
                if jump_best is None or key > jump_best:
                    jump_best = key
                    jump_cell = (r, c)
        if jump_cell is not None and jump_best is not None and jump_best[0] > 0.0:
            row, col = jump_cell
            path.append(jump_cell)
        else:
            # Dead zone: creep one step, diagonally when possible.
            row, col = unit_cell
            path.append(unit_cell)


def _chain_groups(
    path: Sequence[tuple[int, int]],
) -> list[tuple[list[int], list[int]]]:
    """Chain consecutive path cells that share a row or column."""
    groups: list[tuple[list[int], list[int]]] = []
    for row, col in path:
        if groups:
            rows, cols = groups[-1]
            if row in rows or col in cols:
                if row not in rows:
                    rows.append(row)
                if col not in cols:
                    cols.append(col)
                continue
        groups.append(([row], [col]))
    return groups


# ---------------------------------------------------------------------------
# MASSAlign-style two-stage aligner


def align_massalign(
    pair: DocumentPair, cfg: AlignerConfig | None = None
) -> list[SentenceAlignmentRecord]:
    """Two-stage vicinity-driven alignment over a TF-IDF similarity matrix.

    Stage 1 walks a paragraph-level matrix; consecutive visited cells
    sharing a paragraph chain into groups. Stage 2 walks a sentence-level
    matrix inside each group. A visited sentence cell is accepted when
    its similarity and its covering paragraph cell's similarity both reach
    ``merge_threshold``. Consecutive accepted steps on one complex row
    coalesce into a 1:n record, on one simple column into n:1.

    The output is monotone: sorted by smallest complex index, the smallest
    simple indices never decrease. Empty documents yield an empty result.
    """
    cfg = cfg or AlignerConfig()
    if not pair.complex.sentences or not pair.simple.sentences:
        return []
    model = TfIdfModel.fit(
        [s.text for s in pair.complex.sentences]
        + [s.text for s in pair.simple.sentences],
        stopwords=cfg.stopword_list,
    )
    paragraph_matrix = SimilarityMatrix.build(
        model, pair.complex.paragraph_texts(), pair.simple.paragraph_texts()
    )
    paragraph_path = _vicinity_path(paragraph_matrix, cfg.vicinity_radius)
    records: list[SentenceAlignmentRecord] = []
    for rows, cols in _chain_groups(paragraph_path):
        row_set, col_set = set(rows), set(cols)
        complex_sents = [
            s for s in pair.complex.sentences if s.paragraph_index in row_set
        ]
        simple_sents = [
            s for s in pair.simple.sentences if s.paragraph_index in col_set
        ]
        if not complex_sents or not simple_sents:
            continue
        sentence_matrix = SimilarityMatrix.build(
            model,
            [s.text for s in complex_sents],
            [s.text for s in simple_sents],
        )
        sentence_path = _vicinity_path(sentence_matrix, cfg.vicinity_radius)
        accepted: list[tuple[int, int, int]] = []  # (path position, local i, local j)
        for position, (i, j) in enumerate(sentence_path):
            if sentence_matrix.at(i, j) < cfg.merge_threshold:
                continue
            para_sim = paragraph_matrix.at(
                complex_sents[i].paragraph_index, simple_sents[j].paragraph_index
            )
            if para_sim < cfg.merge_threshold:
                continue
            accepted.append((position, i, j))
        records.extend(
            _coalesce(accepted, complex_sents, simple_sents)
        )
    records.sort(key=lambda r: (min(r.complex_indices), min(r.simple_indices)))
    return records


def _coalesce(
    accepted: Sequence[tuple[int, int, int]],
    complex_sents: Sequence[Sentence],
    simple_sents: Sequence[Sentence],
) -> list[SentenceAlignmentRecord]:
    records: list[SentenceAlignmentRecord] = []
    run_rows: list[int] = []
    run_cols: list[int] = []
    last_position = None

    def flush() -> None:
        if run_rows:
            records.append(
                SentenceAlignmentRecord(
                    tuple(complex_sents[i].index for i in run_rows),
                    tuple(simple_sents[j].index for j in run_cols),
                )
            )

    for position, i, j in accepted:
        if last_position is not None and position == last_position + 1:
            if len(run_rows) == 1 and i == run_rows[0]:
                if j not in run_cols:
                    run_cols.append(j)
                last_position = position
                continue
            if len(run_cols) == 1 and j == run_cols[0] and len(run_rows) >= 1:
                if i not in run_rows:
                    run_rows.append(i)
                last_position = position
                continue
        flush()
        run_rows, run_cols = [i], [j]
        last_position = position
    flush()
    return records


# ---------------------------------------------------------------------------
# CATS C3G


def _trigram_counts(text: str) -> Counter[str]:
    lowered = text.lower()
    return Counter(lowered[i : i + 3] for i in range(len(lowered) - 2))


def _counter_cosine(a: Counter[str], b: Counter[str]) -> float:
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(count * b.get(gram, 0) for gram, count in a.items())
    norm_a = math.sqrt(sum(c * c for c in a.values()))
    norm_b = math.sqrt(sum(c * c for c in b.values()))
    return dot / (norm_a * norm_b)


def character_trigram_similarity(a: str, b: str) -> float:
    """Cosine over character-trigram counts; lowercased, spaces kept."""
    return _counter_cosine(_trigram_counts(a), _trigram_counts(b))


def align_cats_c3g(
    pair: DocumentPair, cfg: AlignerConfig | None = None
) -> list[SentenceAlignmentRecord]:
    """Closest-simple-sentence matching on character-trigram cosine.

    Every complex sentence is paired with its most similar simple sentence
    (ties toward the smaller simple index) and a 1:1 record is emitted when
    the similarity reaches ``cats_threshold``.
    """
    cfg = cfg or AlignerConfig()
    simple_grams = [_trigram_counts(s.text) for s in pair.simple.sentences]
    records = []
    for complex_sentence in pair.complex.sentences:
        grams = _trigram_counts(complex_sentence.text)
        best_index = None
        best_sim = -1.0
        for j, other in enumerate(simple_grams):
            sim = _counter_cosine(grams, other)
            if sim > best_sim:
                best_sim = sim
                best_index = j
        if best_index is not None and best_sim >= cfg.cats_threshold:
            records.append(
                SentenceAlignmentRecord((complex_sentence.index,), (best_index,))
            )
    return records


# ---------------------------------------------------------------------------
# Threshold alignment on external embeddings


@dataclass(frozen=True)
class EmbeddingTable:
    """One embedding vector per sentence ordinal of a document."""

    dim: int
    vectors: Mapping[int, tuple[float, ...]]

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValidationError(f"embedding dim must be positive, got {self.dim}")
        object.__setattr__(
            self,
            "vectors",
            {ordinal: tuple(vector) for ordinal, vector in self.vectors.items()},
        )
        for ordinal, vector in self.vectors.items():
            if len(vector) != self.dim:
                raise ValidationError(
                    f"vector for sentence {ordinal} has length {len(vector)}, "
                    f"expected {self.dim}"
                )


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Read a ``.emb`` file: ``dim <N>`` then ``<ordinal> <f1> ... <fN>``."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="\n") as handle:
        lines = handle.read().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("dim "):
        raise FormatError("first line must be 'dim <N>'", path=path, line_no=1)
    try:
        dim = int(lines[0][4:])
    except ValueError:
        raise FormatError(
            f"bad dimension {lines[0][4:]!r}", path=path, line_no=1, field="dim"
        ) from None
    vectors: dict[int, tuple[float, ...]] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split()
        if len(parts) != dim + 1:
            raise FormatError(
                f"expected ordinal plus {dim} floats, got {len(parts)} fields",
                path=path,
                line_no=line_no,
            )
        try:
            ordinal = int(parts[0])
            values = tuple(float(p) for p in parts[1:])
        except ValueError:
            raise FormatError(
                "non-numeric embedding entry", path=path, line_no=line_no
            ) from None
        if ordinal in vectors:
            raise FormatError(
                f"duplicate ordinal {ordinal}", path=path, line_no=line_no
            )
        vectors[ordinal] = values
    return EmbeddingTable(dim=dim, vectors=vectors)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(f"dim {table.dim}\n")
        for ordinal in sorted(table.vectors):
            values = " ".join(repr(v) for v in table.vectors[ordinal])
            handle.write(f"{ordinal} {values}\n")


def _dense_cosine(a: Sequence[float], b: Sequence[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    norm_a = math.sqrt(sum(x * x for x in a))
    norm_b = math.sqrt(sum(y * y for y in b))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def align_embed_threshold(
    pair: DocumentPair,
    embeds: tuple[EmbeddingTable, EmbeddingTable],
    cfg: AlignerConfig | None = None,
) -> list[SentenceAlignmentRecord]:
    """Cosine-threshold alignment on externally computed embeddings.

    For every simple sentence the most similar complex sentence is picked;
    a 1:1 record is emitted when the cosine reaches ``embed_threshold``
    (inclusive). With ``cfg.mutual_best`` the complex sentence's own argmax
    must point back at the simple sentence.
    """
    cfg = cfg or AlignerConfig()
    complex_table, simple_table = embeds
    if complex_table.dim != simple_table.dim:
        raise ConfigurationError(
            f"embedding dimensions differ: {complex_table.dim} vs {simple_table.dim}"
        )
    for document, table in (
        (pair.complex, complex_table),
        (pair.simple, simple_table),
    ):
        for sentence in document.sentences:
            if sentence.index not in table.vectors:
                raise ConfigurationError(
                    f"no embedding for sentence {sentence.index} of "
                    f"document {document.doc_id!r}"
                )
    complex_vectors = [
        complex_table.vectors[s.index] for s in pair.complex.sentences
    ]
    simple_vectors = [simple_table.vectors[s.index] for s in pair.simple.sentences]

    def argmax(target: Sequence[float], others: list[tuple[float, ...]]) -> tuple[int | None, float]:
        best_index = None
        best_sim = -math.inf
        for index, other in enumerate(others):
            sim = _dense_cosine(target, other)
            if sim > best_sim:
                best_sim = sim
                best_index = index
        return best_index, best_sim

    records = []
    for j, simple_vector in enumerate(simple_vectors):
        best_i, best_sim = argmax(simple_vector, complex_vectors)
        if best_i is None or best_sim < cfg.embed_threshold:
            continue
        if cfg.mutual_best:
            back, _ = argmax(complex_vectors[best_i], simple_vectors)
            if back != j:
                continue
        records.append(SentenceAlignmentRecord((best_i,), (j,)))
    return records


def expanded_pairs(records: Iterable[SentenceAlignmentRecord]) -> set[tuple[int, int]]:
    """Union of all records' expanded sentence index pairs."""
    result: set[tuple[int, int]] = set()
    for record in records:
        for c in record.complex_indices:
            for s in record.simple_indices:
                result.add((c, s))
    return result
