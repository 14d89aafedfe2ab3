import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from overcomplete import BinaryEmbeddings, EmbeddingMatrix, SparseEmbeddings
from overcomplete.io import (
    ParseError,
    read_embeddings,
    read_labeled,
    read_similarity,
    read_sparse,
    read_vectors,
    write_binary,
    write_embeddings,
    write_sparse,
)


def write(tmp_path, name, text, mode="w"):
    p = tmp_path / name
    if mode == "wb":
        p.write_bytes(text)
    else:
        p.write_text(text, encoding="utf-8")
    return p


def test_plain_and_headered_parse_identically(tmp_path):
    a = read_embeddings(write(tmp_path, "a.txt", "a 1.0 2.0\nb 3.0 4.0\n"))
    b = read_embeddings(write(tmp_path, "b.txt", "2 2\na 1.0 2.0\nb 3.0 4.0\n"))
    assert (a.V, a.L) == (2, 2)
    assert a.vocab == b.vocab == ("a", "b")
    np.testing.assert_array_equal(a.data, b.data)
    assert read_embeddings(tmp_path / "b.txt", format="headered").vocab == ("a", "b")


def test_crlf_accepted(tmp_path):
    X = read_embeddings(write(tmp_path, "c.txt", b"a 1 2\r\nb 3 4\r\n", "wb"))
    assert X.data.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_ragged_row_is_located(tmp_path):
    p = write(tmp_path, "r.txt", "a 1.0 2.0\nb 1.0\n")
    with pytest.raises(ParseError) as exc:
        read_embeddings(p)
    assert exc.value.lineno == 2


def test_non_numeric_and_non_finite_fields(tmp_path):
    with pytest.raises(ParseError) as exc:
        read_embeddings(write(tmp_path, "n.txt", "a 1.0 2.0\nb x 2.0\n"))
    assert exc.value.lineno == 2
    with pytest.raises(ParseError):
        read_embeddings(write(tmp_path, "f.txt", "a nan 2.0\n"))


def test_whitespace_in_word_rejected_with_line(tmp_path):
    with pytest.raises(ParseError) as exc:
        read_embeddings(write(tmp_path, "w.txt", "a 1 2\nnew york 1 2\n"))
    assert exc.value.lineno == 2


def test_duplicate_words_first_wins(tmp_path, caplog):
    X = read_embeddings(write(tmp_path, "d.txt", "a 1 2\nb 3 4\na 5 6\n"))
    assert X.vocab == ("a", "b")
    assert X.vector("a").tolist() == [1.0, 2.0]
    assert "1 duplicate" in caplog.text


def test_header_row_count_checked(tmp_path):
    with pytest.raises(ParseError):
        read_embeddings(write(tmp_path, "h.txt", "3 2\na 1 2\nb 3 4\n"))


def test_empty_file(tmp_path):
    with pytest.raises(ParseError):
        read_embeddings(write(tmp_path, "e.txt", ""))


def one_row():
    return SparseEmbeddings(("w",), 3, ((np.array([1]), np.array([0.5])),))


def test_dense_text_layout(tmp_path):
    p = tmp_path / "o.txt"
    write_sparse(p, one_row(), "dense-text")
    assert p.read_text() == "w 0 0.5 0\n"
    assert read_embeddings(p).data.tolist() == [[0.0, 0.5, 0.0]]


def test_index_value_layout(tmp_path):
    p = tmp_path / "o.txt"
    write_sparse(p, one_row(), "index-value")
    assert p.read_text().splitlines()[1] == "w 1:0.5"
    back = read_sparse(p)
    assert back.K == 3 and back.rows[0].indices.tolist() == [1]
    assert isinstance(read_vectors(p), SparseEmbeddings)
    assert isinstance(read_vectors(tmp_path / "o.txt"), SparseEmbeddings)


def test_unknown_layout(tmp_path):
    with pytest.raises(ValueError):
        write_sparse(tmp_path / "x", one_row(), "csv")


def _random_codes(seed, V=6, K=9):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((V, K)) * 10.0 ** rng.integers(-12, 12, (V, K))
    m *= rng.random((V, K)) < 0.3
    return SparseEmbeddings.from_dense([f"w{i}" for i in range(V)], m)


@settings(max_examples=30, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.integers(0, 2**32 - 1), st.sampled_from(["dense-text", "index-value"]))
def test_write_read_round_trip_bit_exact(tmp_path, seed, layout):
    A = _random_codes(seed)
    p = tmp_path / f"rt-{layout}.txt"
    write_sparse(p, A, layout)
    if layout == "dense-text":
        back = SparseEmbeddings.from_dense(*(lambda X: (X.vocab, X.data))(read_embeddings(p)))
    else:
        back = read_sparse(p)
    assert back.vocab == A.vocab and back.K == A.K
    for r1, r2 in zip(A.rows, back.rows):
        assert r1.indices.tolist() == r2.indices.tolist()
        assert r1.values.tobytes() == r2.values.tobytes()


def test_binary_writer_layouts(tmp_path):
    B = BinaryEmbeddings(("a", "b"), 4, (np.array([0, 3]), np.array([], int)))
    write_binary(tmp_path / "d.txt", B)
    assert (tmp_path / "d.txt").read_text() == "a 1 0 0 1\nb 0 0 0 0\n"
    write_binary(tmp_path / "i.txt", B, "index-value")
    back = read_sparse(tmp_path / "i.txt")
    assert back.rows[0].indices.tolist() == [0, 3] and back.rows[0].values.tolist() == [1.0, 1.0]


def test_embedding_writer_round_trip(tmp_path):
    X = EmbeddingMatrix(("a", "b"), [[0.1, -1e-300], [3.0, 2.5e10]])
    write_embeddings(tmp_path / "x.txt", X, header=True)
    Y = read_embeddings(tmp_path / "x.txt")
    assert Y.data.tobytes() == X.data.tobytes()


def test_similarity_reader(tmp_path):
    ds = read_similarity(write(tmp_path, "s.txt", "cat dog 8.5\n# note\nsun\tmoon\t2\n"))
    assert ds.pairs == [("cat", "dog", 8.5), ("sun", "moon", 2.0)]


def test_similarity_reader_errors(tmp_path):
    with pytest.raises(ParseError) as exc:
        read_similarity(write(tmp_path, "s.txt", "cat dog 1\ncat dog\n"))
    assert exc.value.lineno == 2
    with pytest.raises(ParseError):
        read_similarity(write(tmp_path, "t.txt", "cat dog high\n"))
    with pytest.raises(ParseError):
        read_similarity(write(tmp_path, "u.txt", ""))


def test_labeled_reader(tmp_path):
    ds = read_labeled(write(tmp_path, "l.txt", "pos\tgreat movie\nneg\tBad Film\nneg\t\n"), lowercase=True)
    assert ds.examples[0] == (["great", "movie"], "pos")
    assert ds.examples[1] == (["bad", "film"], "neg")
    assert ds.labels == ["pos", "neg"]
    assert ds.empty == [2]
    with pytest.raises(ParseError):
        read_labeled(write(tmp_path, "m.txt", "no tab here\n"))
