from pathlib import Path
import numpy as np
import pytest
from skillweaver.utils.corpus import load_stopwords
from skillweaver.utils.embeddings import embed_phrase, embed_phrases, load_embeddings, phrase_vocabulary
from skillweaver.utils.errors import EmbeddingParseError, InputFileError

TEST_FILES = Path(__file__).parent / "test_files"
stopwords = load_stopwords()


def test_load_text_embeddings():
    table = load_embeddings(TEST_FILES / "embeddings.txt")
    assert table.dimension == 4
    assert len(table) == 10
    assert table.duplicates == 1
    # first occurrence wins
    assert table["communication"].tolist() == [1.0, 0.0, 0.0, 0.0]
    assert table["polite"][1] == pytest.approx(0.1)


def test_vocabulary_filter():
    table = load_embeddings(TEST_FILES / "embeddings.txt", vocabulary={"team", "player", "zzz"})
    assert len(table) == 2
    assert table.skipped == 9
    assert table.duplicates == 0
    assert table.matrix.dtype == np.float32
    assert table.matrix.shape == (2, 4)
    assert "communication" not in table
    assert table.get("communication") is None
    assert table["player"].tolist() == pytest.approx([0.0, 1.0, 0.1, 0.0])


def test_header_count_too_small(tmp_path):
    path = tmp_path / "short.txt"
    path.write_text("1 2\na 1 2\nb 3 4\nc 5 6\n", encoding="utf-8")
    table = load_embeddings(path)
    assert len(table) == 3
    assert table["c"].tolist() == [5.0, 6.0]


def test_phrase_vocabulary():
    assert phrase_vocabulary(["ability to work under pressure", "team player"], stopwords) == [
        "ability", "player", "pressure", "team", "work",
    ]


def test_wrong_dimension(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 3\nalpha 1 2 3\nbeta 1 2\n", encoding="utf-8")
    with pytest.raises(EmbeddingParseError) as e:
        load_embeddings(path)
    assert e.value.line_number == 3


def test_non_numeric_component(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 2\nalpha 1 x\n", encoding="utf-8")
    with pytest.raises(EmbeddingParseError):
        load_embeddings(path)


def test_missing_embedding_file():
    with pytest.raises(InputFileError):
        load_embeddings(TEST_FILES / "missing.txt")


def test_load_binary_embeddings(tmp_path):
    path = tmp_path / "vectors.bin"
    with open(path, "wb") as f:
        f.write(b"2 3\n")
        f.write(b"alpha " + np.array([0.5, 0.25, -1.0], dtype="<f4").tobytes() + b"\n")
        f.write(b"beta " + np.array([2.0, 0.0, 1.5], dtype="<f4").tobytes() + b"\n")
    table = load_embeddings(path)
    assert table.dimension == 3
    assert table["alpha"].tolist() == [0.5, 0.25, -1.0]
    assert table["beta"].tolist() == [2.0, 0.0, 1.5]


def test_binary_vocabulary_filter(tmp_path):
    path = tmp_path / "vectors.bin"
    with open(path, "wb") as f:
        f.write(b"3 2\n")
        for token, vector in ((b"alpha", [0.5, 0.25]), (b"beta", [2.0, 0.0]), (b"gamma", [1.0, -1.0])):
            f.write(token + b" " + np.array(vector, dtype="<f4").tobytes() + b"\n")
    table = load_embeddings(path, vocabulary=["gamma", "alpha"])
    assert sorted(table.index) == ["alpha", "gamma"]
    assert table.skipped == 1
    assert table["gamma"].tolist() == [1.0, -1.0]


def test_embed_phrase_skips_stopwords():
    table = load_embeddings(TEST_FILES / "embeddings.txt")
    vector = embed_phrase("ability to work under pressure", table, stopwords)
    assert vector.covered_tokens == 3
    assert vector.vector.tolist() == [0.5, 0.5, 0.5, 0.5]


def test_single_token_phrase_keeps_raw_vector():
    table = load_embeddings(TEST_FILES / "embeddings.txt")
    vector = embed_phrase("empathy", table, stopwords)
    assert np.array_equal(vector.vector, table["empathy"])


def test_uncovered_phrases():
    table = load_embeddings(TEST_FILES / "embeddings.txt")
    vectors, uncovered = embed_phrases(["team player", "punctuality", "the"], table, stopwords)
    assert [v.phrase for v in vectors] == ["team player"]
    assert uncovered == ["punctuality", "the"]
    assert vectors[0].vector.tolist() == pytest.approx([0.0, 1.0, 0.05, 0.0])
