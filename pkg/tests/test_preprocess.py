import pytest
from hypothesis import given, strategies as st

from plainalign.preprocess import (
    CleaningReport,
    clean_aligned_pairs,
    levenshtein,
    load_abbreviations,
    segment_sentences,
    tokenize,
    word_count,
    word_tokens,
)
from plainalign.errors import ValidationError


def texts(sentences):
    return [s.text for s in sentences]


class TestSegmentation:
    def test_two_sentences(self):
        assert texts(segment_sentences("Das ist gut. Das auch.")) == [
            "Das ist gut.",
            "Das auch.",
        ]

    def test_abbreviation_suppresses_split(self):
        assert texts(segment_sentences("Dr. Meier kommt.")) == ["Dr. Meier kommt."]

    def test_empty_input(self):
        assert segment_sentences("") == []

    def test_multi_dot_abbreviation(self):
        assert texts(segment_sentences("Wir kaufen Obst, z.B. Äpfel und Birnen.")) == [
            "Wir kaufen Obst, z.B. Äpfel und Birnen."
        ]

    def test_quote_and_digit_triggers(self):
        result = texts(segment_sentences("Er schrie laut! »Komm her.« Ja."))
        assert result[0] == "Er schrie laut!"
        got = texts(segment_sentences("Es begann 1920. 1921 endete es."))
        assert got == ["Es begann 1920.", "1921 endete es."]

    def test_no_split_without_whitespace(self):
        assert texts(segment_sentences("Ca.3,5 Millionen Menschen lesen mit.")) == [
            "Ca.3,5 Millionen Menschen lesen mit."
        ]

    def test_paragraph_boundaries(self):
        sentences = segment_sentences("Erster Satz ohne Ende\n\nZweiter Absatz.")
        assert [s.paragraph_index for s in sentences] == [0, 1]
        assert sentences[0].text == "Erster Satz ohne Ende"

    def test_interior_newline_is_whitespace(self):
        sentences = segment_sentences("Das ist\nein Satz.")
        assert texts(sentences) == ["Das ist ein Satz."]

    def test_custom_abbreviations(self, tmp_path):
        path = tmp_path / "abbr.txt"
        path.write_text("Xyz.  # test entry\n", encoding="utf-8")
        abbreviations = load_abbreviations(path)
        assert texts(segment_sentences("Xyz. Meier kommt.", abbreviations)) == [
            "Xyz. Meier kommt."
        ]

    @given(
        st.lists(
            st.text(
                alphabet="abcdefghij ÄÖÜäöüß.!?",
                min_size=1,
                max_size=40,
            ),
            min_size=0,
            max_size=4,
        )
    )
    def test_no_characters_dropped(self, paragraphs):
        text = "\n\n".join(paragraphs)
        sentences = segment_sentences(text)
        flattened = "".join("".join(s.text.split()) for s in sentences)
        assert flattened == "".join(text.split())


class TestTokenize:
    def test_trailing_punctuation(self):
        tokens = tokenize("Das ist schön!")
        assert [t.text for t in tokens] == ["Das", "ist", "schön", "!"]
        assert sum(t.is_word for t in tokens) == 3

    def test_hyphen_compound_stays_whole(self):
        tokens = tokenize("Anti-Semitismus.")
        assert [t.text for t in tokens] == ["Anti-Semitismus", "."]
        assert sum(t.is_word for t in tokens) == 1

    def test_nested_quotes(self):
        tokens = tokenize("»Tom!«")
        assert [t.text for t in tokens] == ["»", "Tom", "!", "«"]
        assert sum(t.is_word for t in tokens) == 1

    def test_pure_punctuation_chunk(self):
        tokens = tokenize("ja —")
        assert [t.text for t in tokens] == ["ja", "—"]
        assert [t.is_word for t in tokens] == [True, False]

    @given(st.text(alphabet="abc äö-.»«!?,12 ", max_size=60))
    def test_tokens_cover_all_non_whitespace(self, sentence):
        tokens = tokenize(sentence)
        assert "".join(t.text for t in tokens) == "".join(sentence.split())


class TestLevenshtein:
    def test_one_character_changed(self):
        assert levenshtein("Das ist schön!", "Das ist schön.") == 1

    def test_identity(self):
        assert levenshtein("gleich", "gleich") == 0

    def test_empty_versus_word(self):
        assert levenshtein("", "abc") == 3

    @given(
        st.text(max_size=8),
        st.text(max_size=8),
        st.text(max_size=8),
    )
    def test_metric_axioms(self, a, b, c):
        assert levenshtein(a, b) == levenshtein(b, a)
        assert (levenshtein(a, b) == 0) == (a == b)
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


class TestCleaning:
    def test_near_identical_removed(self):
        kept, report = clean_aligned_pairs(
            [("Das ist schön!", "Das ist schön.", "doc1")]
        )
        assert kept == []
        assert report.removed_near_identical == 1

    def test_short_removed(self):
        kept, report = clean_aligned_pairs(
            [("Anti-Semitismus.", "Der Hass auf jüdische Menschen.", "doc1")]
        )
        assert kept == []
        assert report.removed_short == 1

    def test_duplicate_across_documents_removed_once(self):
        pair = ("Der Begriff bedeutet Folgendes.", "Das Wort heißt etwas.", None)
        kept, report = clean_aligned_pairs(
            [pair[:2] + ("docA",), pair[:2] + ("docB",)]
        )
        assert len(kept) == 1
        assert kept[0][2] == "docA"
        assert report.removed_duplicates == 1

    def test_first_matching_rule_wins(self):
        # Short beats near-identical when both would apply.
        kept, report = clean_aligned_pairs([("Hallo!", "Hallo.", "d")])
        assert report.removed_short == 1
        assert report.removed_near_identical == 0

    def test_counts_sum_to_input(self):
        pairs = [
            ("Das ist schön!", "Das ist schön.", "d"),
            ("Wort.", "Viele einfache Wörter stehen hier.", "d"),
            ("Ein guter langer Satz steht hier.", "Ein kurzer Satz steht hier.", "d"),
            ("Ein guter langer Satz steht hier.", "Ein kurzer Satz steht hier.", "e"),
        ]
        kept, report = clean_aligned_pairs(pairs)
        assert report.total == len(pairs)
        assert report.kept == len(kept) == 1

    def test_cleaning_is_idempotent(self):
        pairs = [
            ("Das ist schön!", "Das ist schön.", "d"),
            ("Ein guter langer Satz steht hier.", "Ein kurzer Satz steht hier.", "d"),
            ("Ein guter langer Satz steht hier.", "Ein kurzer Satz steht hier.", "e"),
            ("Noch ein anderer Satz hier.", "Auch dieser Satz bleibt stehen.", "e"),
        ]
        kept, _ = clean_aligned_pairs(pairs)
        kept_again, report = clean_aligned_pairs(kept)
        assert kept_again == kept
        assert report.kept == len(kept)
        assert report.total == report.kept

    def test_report_rejects_negative_counts(self):
        with pytest.raises(ValidationError):
            CleaningReport(
                removed_short=-1,
                removed_near_identical=0,
                removed_duplicates=0,
                kept=1,
            )


def test_word_helpers():
    assert word_tokens("Das ist gut.") == ["Das", "ist", "gut"]
    assert word_count("Anti-Semitismus.") == 1
