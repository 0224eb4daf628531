import numpy as np
import pytest
import scipy.sparse
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gmapprox.mmio import MatrixMarketError, read_matrix, write_matrix

MALFORMED = {
    "field": "%%MatrixMarket matrix coordinate complex general\n2 2 1\n1 1 1.0 0.0\n",
    "banner": "%MatrixMarket matrix coordinate real general\n2 2 0\n",
    "symmetry": "%%MatrixMarket matrix coordinate real hermitian\n2 2 0\n",
    "size": "%%MatrixMarket matrix coordinate real general\n2 two 1\n1 1 1.0\n",
    "bounds": "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
    "entry": "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n",
    "duplicate": "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n1 1 2.0\n",
    "count": "%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1.0\n2 2 2.0\n",
}


def write_text(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_dense_round_trip_bit_identical(tmp_path):
    A = np.random.default_rng(0).standard_normal((7, 5))
    write_matrix(tmp_path / "a.mtx", A)
    B = read_matrix(tmp_path / "a.mtx")
    assert isinstance(B, np.ndarray)
    assert B.tobytes() == A.tobytes()


def test_sparse_round_trip(tmp_path):
    A = scipy.sparse.random_array((30, 20), density=0.1, rng=1, format="csr")
    write_matrix(tmp_path / "a.mtx", A)
    B = read_matrix(tmp_path / "a.mtx")
    assert scipy.sparse.issparse(B)
    assert B.shape == A.shape and B.nnz == A.nnz
    np.testing.assert_array_equal(B.toarray(), A.toarray())


def test_sparse_empty(tmp_path):
    write_matrix(tmp_path / "z.mtx", scipy.sparse.csr_array((4, 3)))
    lines = (tmp_path / "z.mtx").read_text().splitlines()
    assert lines == ["%%MatrixMarket matrix coordinate real general", "4 3 0"]
    B = read_matrix(tmp_path / "z.mtx")
    assert B.shape == (4, 3) and B.nnz == 0


def test_dense_column_major_layout(tmp_path):
    write_matrix(tmp_path / "a.mtx", np.array([[1.0, 2.0], [3.0, 4.0]]), comment="hello")
    assert (tmp_path / "a.mtx").read_text().splitlines() == [
        "%%MatrixMarket matrix array real general", "% hello", "2 2", "1", "3", "2", "4"]


def test_symmetric_and_integer_files(tmp_path):
    path = write_text(tmp_path, "s.mtx",
                      "%%MatrixMarket matrix coordinate integer symmetric\n% c\n3 3 2\n1 1 5\n3 1 -2\n")
    np.testing.assert_array_equal(read_matrix(path).toarray(), [[5, 0, -2], [0, 0, 0], [-2, 0, 0]])
    path = write_text(tmp_path, "d.mtx", "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n")
    np.testing.assert_array_equal(read_matrix(path), [[1, 2], [2, 3]])


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_dense_round_trip_property(tmp_path_factory, A):
    path = tmp_path_factory.mktemp("mm") / "a.mtx"
    write_matrix(path, A)
    B = read_matrix(path)
    # -0.0 round-trips as -0.0 too
    assert B.tobytes() == (A + 0.0).tobytes() or np.array_equal(B, A)


@pytest.mark.parametrize("kind", sorted(MALFORMED))
def test_malformed_inputs(tmp_path, kind):
    path = write_text(tmp_path, f"{kind}.mtx", MALFORMED[kind])
    with pytest.raises(MatrixMarketError) as info:
        read_matrix(path)
    assert info.value.kind == kind
    assert str(path) in str(info.value)
    assert info.value.lineno >= 1


def test_error_line_numbers(tmp_path):
    path = write_text(tmp_path, "b.mtx", MALFORMED["bounds"])
    with pytest.raises(MatrixMarketError) as info:
        read_matrix(path)
    assert info.value.lineno == 3


def test_too_many_entries_and_nonfinite(tmp_path):
    path = write_text(tmp_path, "m.mtx", "%%MatrixMarket matrix array real general\n1 1\n1\n2\n")
    with pytest.raises(MatrixMarketError, match="count"):
        read_matrix(path)
    path = write_text(tmp_path, "n.mtx", "%%MatrixMarket matrix array real general\n1 1\nnan\n")
    with pytest.raises(MatrixMarketError, match="not finite"):
        read_matrix(path)


def test_write_rejects_vectors(tmp_path):
    with pytest.raises(ValueError):
        write_matrix(tmp_path / "v.mtx", np.ones(3))
