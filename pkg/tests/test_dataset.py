import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smallwindow.dataset import (
    Dataset, DatasetLoadError, SplitSpec, jitter_duplicate_y, lag_align, load_csv, split_prefix,
    write_csv,
)
from smallwindow.numeric import ContractError


def make(y, c=2, name="t"):
    y = np.asarray(y, dtype=float)
    X = np.arange(len(y) * c, dtype=float).reshape(len(y), c)
    return Dataset(name=name, X=X, y=y)


def test_load_three_by_three(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,target\n1,2,3\n4,5,6\n7,8,9\n")
    d = load_csv(p, "target")
    assert d.X.shape == (3, 2) and d.y.tolist() == [3.0, 6.0, 9.0]
    assert d.column_names == ("a", "b") and d.y_name == "target"


def test_load_y_by_index(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,target,b\n1,2,3\n4,5,6\n")
    assert load_csv(p, 1).y.tolist() == [2.0, 5.0]


def test_load_excluding_columns(tmp_path):
    p = tmp_path / "sru.csv"
    p.write_text("u1,u2,y1,y2\n1,2,3,4\n5,6,7,8\n")
    d = load_csv(p, "y1", exclude=["y2"])
    assert d.column_names == ("u1", "u2") and d.y.tolist() == [3.0, 7.0]
    with pytest.raises(DatasetLoadError):
        load_csv(p, "y1", exclude=["y3"])


def test_blank_cell_names_row_and_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,target\n1,2,3\n4,,6\n")
    with pytest.raises(DatasetLoadError) as exc:
        load_csv(p, "target")
    msg = str(exc.value)
    assert "b" in msg and ":3" in msg


def test_missing_y_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b\n1,2\n3,4\n")
    with pytest.raises(DatasetLoadError, match="target"):
        load_csv(p, "target")


def test_ragged_row(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b\n1,2\n3\n")
    with pytest.raises(DatasetLoadError):
        load_csv(p, "b")


def test_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    d = Dataset(name="r", X=rng.normal(size=(20, 4)) * 1e3, y=rng.normal(size=20) / 7,
                column_names=("p", "q", "r", "s"), y_name="out")
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(d, p1)
    e = load_csv(p1, "out")
    assert np.array_equal(e.X, d.X) and np.array_equal(e.y, d.y)
    write_csv(e, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_dataset_invariants():
    with pytest.raises(ContractError):
        make([1.0])
    with pytest.raises(ContractError):
        Dataset(name="x", X=np.ones((3, 2)), y=np.ones(2))
    with pytest.raises(ContractError):
        Dataset(name="x", X=np.array([[np.inf], [1.0]]), y=np.ones(2))


def test_lag_zero_is_identity():
    d = make(range(10))
    assert lag_align(d, 0) is d


def test_lag_eight_on_ten():
    d = make(range(10))
    e = lag_align(d, 8)
    assert e.y.tolist() == [8.0, 9.0]
    assert np.array_equal(e.X, d.X[[0, 1]])


def test_lag_n_minus_one_rejected():
    with pytest.raises(ContractError):
        lag_align(make(range(10)), 9)


@given(st.integers(2, 40), st.data())
@settings(max_examples=30)
def test_lag_pairs_y_with_earlier_x(n, data):
    lag = data.draw(st.integers(0, n - 2))
    d = make(range(n))
    e = lag_align(d, lag)
    assert e.n_samples == n - lag
    for i in range(e.n_samples):
        # X row i was recorded lag samples before the label it is paired with
        assert e.y[i] - lag == d.y[i]
        assert np.array_equal(e.X[i], d.X[i])


def test_jitter_examples():
    assert jitter_duplicate_y(make([1, 1, 2]), 1e-6).y.tolist() == [1, 1.000001, 2]
    assert jitter_duplicate_y(make([5, 5, 5]), 1e-6).y.tolist() == [5, 5 + 1e-6, 5 + 1e-6 + 1e-6]
    inc = make([0.1, 0.5, 2.0, 3.0])
    assert np.array_equal(jitter_duplicate_y(inc).y, inc.y)


@given(st.lists(st.sampled_from([0.0, 1.0, 2.0]), min_size=2, max_size=30))
def test_jitter_removes_adjacent_repeats(ys):
    out = jitter_duplicate_y(make(ys), 1e-6).y
    assert np.all(out[1:] != out[:-1])
    assert np.all(np.abs(out - np.array(ys)) <= 1e-6 * len(ys))


def test_split_examples():
    head, tail = split_prefix(make(range(100)), SplitSpec(0.04))
    assert (head.n_samples, tail.n_samples) == (4, 96)
    head, tail = split_prefix(make(range(4)), SplitSpec(0.5))
    assert (head.n_samples, tail.n_samples) == (2, 2)
    head, _ = split_prefix(make(range(2394)), SplitSpec(0.04))
    assert head.n_samples == math.ceil(0.04 * 2394) == 96


def test_split_keeps_time_order():
    head, tail = split_prefix(make(range(10)), SplitSpec(0.3))
    assert head.y.tolist() == [0, 1, 2] and tail.y[0] == 3


def test_split_rejects_bad_fraction():
    with pytest.raises(ContractError):
        SplitSpec(0.0)
    with pytest.raises(ContractError):
        split_prefix(make(range(10)), SplitSpec(0.05))


@given(st.integers(4, 60), st.floats(0.01, 0.99))
def test_split_concatenation_restores_dataset(n, frac):
    d = make(np.arange(n) * 1.5)
    try:
        head, tail = split_prefix(d, SplitSpec(frac))
    except ContractError:
        return
    assert np.array_equal(np.vstack([head.X, tail.X]), d.X)
    assert np.array_equal(np.concatenate([head.y, tail.y]), d.y)
