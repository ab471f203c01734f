import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evotfs.data import Dataset
from evotfs.errors import InvalidWindow, SeriesTooShort, WindowTooLong
from evotfs.terminals import default_window_len, extract_windows, sample_constant


def test_windows_enumerated_by_hand():
    d = Dataset(np.array([[1.0, 2.0, 3.0, 4.0, 5.0]]), np.array([0]))
    pool = extract_windows(d, 3)
    assert pool.window_count_per_series == 3
    np.testing.assert_array_equal(pool.subseries, [[1, 2, 3], [2, 3, 4], [3, 4, 5]])


def test_full_length_window_is_the_series():
    x = np.arange(12.0).reshape(3, 4)
    pool = extract_windows(Dataset(x, np.array([0, 1, 1])), 4)
    np.testing.assert_array_equal(pool.subseries, x)


def test_pool_size_and_order():
    x = np.array([[0.0, 1, 2, 3], [10, 11, 12, 13]])
    pool = extract_windows(Dataset(x, np.array([0, 1])), 2)
    assert len(pool) == 2 * 3
    assert pool.index_of(1, 0) == 3
    np.testing.assert_array_equal(pool.subseries[3], [10, 11])
    assert pool.source.tolist() == [0, 0, 0, 1, 1, 1]


def test_window_bounds():
    d = Dataset(np.zeros((1, 4)), np.array([0]))
    with pytest.raises(WindowTooLong):
        extract_windows(d, 5)
    with pytest.raises(InvalidWindow):
        extract_windows(d, 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(1, 20), st.data())
def test_windows_tile_back_to_series(n, T, data):
    L = data.draw(st.integers(1, T))
    rng = np.random.default_rng(n * 100 + T)
    x = rng.random((n, T))
    pool = extract_windows(Dataset(x, np.zeros(n, dtype=int)), L)
    K = T - L + 1
    assert pool.subseries.shape == (n * K, L)
    for i in range(n):
        w = pool.subseries[i * K : (i + 1) * K]
        rebuilt = np.concatenate([w[:, 0], w[-1, 1:]])
        np.testing.assert_array_equal(rebuilt, x[i])


def test_pool_ignores_labels():
    x = np.random.default_rng(0).random((4, 6))
    a = extract_windows(Dataset(x, np.array([0, 0, 1, 1])), 3)
    b = extract_windows(Dataset(x, np.array([1, 0, 1, 0])), 3)
    np.testing.assert_array_equal(a.subseries, b.subseries)


@pytest.mark.parametrize("T, L", [(96, 32), (100, 34), (3, 1), (60, 20), (720, 240)])
def test_default_window_len(T, L):
    assert default_window_len(T) == L
    assert 3 * L >= T


def test_default_window_len_too_short():
    with pytest.raises(SeriesTooShort):
        default_window_len(2)


def test_constants_deterministic_and_in_range():
    a = [sample_constant(np.random.default_rng(42)) for _ in range(3)]
    assert a[0] == a[1] == a[2]
    rng = np.random.default_rng(7)
    draws = np.array([sample_constant(rng) for _ in range(100_000)])
    assert draws.min() >= -1 and draws.max() <= 1
    assert abs(draws.mean()) <= 0.02
