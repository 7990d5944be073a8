import numpy as np
import pytest

from vrbb.data import (
    ParseError,
    UnsupportedLabelsError,
    load_libsvm,
    parse_libsvm,
    remap_labels,
)

from _synth import small_random_libsvm_text


def test_parse_basic_line():
    ds = parse_libsvm("-1 1:0.5 3:2.0\n")
    assert ds.n == 1 and ds.d == 3
    row = ds.row(0)
    np.testing.assert_array_equal(row.indices, [0, 2])
    np.testing.assert_array_equal(row.values, [0.5, 2.0])
    assert row.label == -1.0


def test_parse_empty_feature_row():
    ds = parse_libsvm("+1\n")
    assert ds.n == 1
    assert ds.row(0).indices.size == 0
    assert ds.row(0).label == 1.0


def test_parse_keeps_empty_rows_among_others():
    ds = parse_libsvm("+1 2:1.0\n-1\n+1 1:3.0\n")
    assert ds.n == 3
    assert ds.row_nnz(1) == 0


def test_parse_blank_lines_skipped():
    ds = parse_libsvm("+1 1:1\n\n-1 2:1\n\n")
    assert ds.n == 2


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 2"):
        parse_libsvm("+1 1:1\n-1 1:not_a_number\n")
    with pytest.raises(ParseError, match="line 1"):
        parse_libsvm("banana 1:1\n")
    with pytest.raises(ParseError, match="strictly increasing"):
        parse_libsvm("+1 3:1 2:1\n")
    with pytest.raises(ParseError, match="missing ':'"):
        parse_libsvm("+1 3\n")
    with pytest.raises(ParseError, match="1-based"):
        parse_libsvm("+1 0:1\n")
    with pytest.raises(ParseError, match="empty input"):
        parse_libsvm("")


def test_dim_override():
    ds = parse_libsvm("+1 2:1\n", dim=10)
    assert ds.d == 10
    with pytest.raises(ValueError, match="smaller than"):
        parse_libsvm("+1 5:1\n", dim=3)


def test_remap_labels_two_class():
    np.testing.assert_array_equal(remap_labels([0, 1, 1]), [-1.0, 1.0, 1.0])
    np.testing.assert_array_equal(remap_labels([-1, 1]), [-1.0, 1.0])
    np.testing.assert_array_equal(remap_labels([2, 4, 2]), [-1.0, 1.0, -1.0])


def test_remap_labels_rejects_multiclass():
    with pytest.raises(UnsupportedLabelsError):
        remap_labels([1, 2, 3])


def test_row_stats_trivial():
    ds = parse_libsvm("-1 1:0.5 3:-2.0\n+1\n")
    assert ds.row_inf_norm(0) == 2.0
    assert ds.row_nnz(0) == 2
    assert ds.row_inf_norm(1) == 0.0
    assert ds.row_nnz(1) == 0
    with pytest.raises(IndexError):
        ds.row_inf_norm(2)
    with pytest.raises(IndexError):
        ds.row_nnz(-1)


def test_row_stats_match_dense_scan(rng):
    ds = parse_libsvm(small_random_libsvm_text(5, 3, seed=3, nnz=2))
    dense = ds.X.toarray()
    for i in range(ds.n):
        assert ds.row_inf_norm(i) == np.abs(dense[i]).max()
        assert ds.row_nnz(i) == np.count_nonzero(dense[i])


def test_inf_norm_zero_iff_nnz_zero():
    ds = parse_libsvm(small_random_libsvm_text(40, 8, seed=5) + "+1\n")
    inf_norms = ds.row_inf_norms()
    nnz = ds.row_nnz_counts()
    np.testing.assert_array_equal(inf_norms == 0.0, nnz == 0)


def test_round_trip():
    ds = parse_libsvm(small_random_libsvm_text(30, 9, seed=11))
    again = parse_libsvm(ds.to_libsvm())
    assert ds == again


def test_load_from_file(tmp_path):
    path = tmp_path / "tiny.txt"
    path.write_text("+1 1:1.5\n-1 2:2\n")
    ds = load_libsvm(path)
    assert ds.n == 2 and ds.d == 2


TABLE1 = {
    "a8a": (22696, 123),
    "w8a": (49749, 300),
    "ijcnn1": (49990, 22),
    "covtype": (581012, 54),
    "phishing": (11055, 68),
    "mushrooms": (8124, 112),
}


@pytest.mark.parametrize("name,shape", sorted(TABLE1.items()))
def test_reference_dataset_shapes(name, shape, benchmark_dataset):
    # Only meaningful against genuine LIBSVM copies; the generated
    # stand-ins are desk-scale and do not claim these shapes.
    import os
    from pathlib import Path

    env = os.environ.get("VRBB_DATA_DIR")
    path = None
    if env:
        for cand in (Path(env) / name, Path(env) / f"{name}.txt"):
            if cand.exists():
                path = cand
    if path is None:
        pytest.skip(f"real {name} not present under $VRBB_DATA_DIR")
    ds = load_libsvm(path)
    assert (ds.n, ds.d) == shape
