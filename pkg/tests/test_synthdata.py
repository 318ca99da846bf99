import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flexact.activations import CATALOG, Activation
from flexact.synthdata import Dataset, DatasetSpec, generate, labels, split


def one_row(truth, x0):
    spec = DatasetSpec(truth, n_samples=1)
    return float(labels(spec, np.array([[x0, 0.0, 0.0, 0.0]]))[0])


def test_label_examples():
    assert one_row(Activation.IDENTITY, 0.4) == 2.0
    assert one_row(Activation.RELU, -1.0) == 0.0
    assert one_row(Activation.SIGMOID, 0.0) == 0.5
    assert one_row(Activation.LRELU, -1.0) == pytest.approx(-0.05, abs=1e-15)


@pytest.mark.parametrize("truth", CATALOG)
def test_label_fidelity_bit_exact(truth):
    data = generate(DatasetSpec(truth, seed=3))
    x = data.X[:, 0] * 5.0
    expected = {
        Activation.RELU: np.maximum(x, 0.0),
        Activation.TANH: np.tanh(x),
        Activation.LRELU: np.where(x > 0, x, 0.01 * x),
        Activation.IDENTITY: x,
    }.get(truth)
    if truth == Activation.SIGMOID:
        # sign-split evaluation; compare against the textbook form loosely, then bitwise to itself
        np.testing.assert_allclose(data.y, 1 / (1 + np.exp(-x)), rtol=1e-15, atol=1e-300)
        assert np.array_equal(data.y, labels(DatasetSpec(truth), data.X))
    else:
        assert np.array_equal(data.y, expected)


@pytest.mark.parametrize("truth", CATALOG)
def test_distractors_are_uncorrelated(truth):
    data = generate(DatasetSpec(truth, n_samples=2048, seed=11))
    for j in range(1, 4):
        r = np.corrcoef(data.X[:, j], data.y)[0, 1]
        assert abs(r) < 0.1


@pytest.mark.parametrize("seed", range(5))
def test_columns_are_standard_normal(seed):
    X = generate(DatasetSpec(Activation.RELU, n_samples=2048, seed=seed)).X
    assert np.all(np.abs(X.mean(axis=0)) < 0.1)
    assert np.all(np.abs(X.var(axis=0) - 1.0) < 0.15)


def test_generate_is_deterministic():
    a = generate(DatasetSpec(Activation.TANH, seed=7))
    b = generate(DatasetSpec(Activation.TANH, seed=7))
    c = generate(DatasetSpec(Activation.TANH, seed=8))
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y)
    assert not np.array_equal(a.X, c.X)


def test_same_seed_same_inputs_across_truths():
    a = generate(DatasetSpec(Activation.TANH, seed=2))
    b = generate(DatasetSpec(Activation.RELU, seed=2))
    assert np.array_equal(a.X, b.X)


def test_informative_index_is_respected():
    spec = DatasetSpec(Activation.IDENTITY, informative_index=2, n_samples=16)
    data = generate(spec)
    assert np.array_equal(data.y, 5.0 * data.X[:, 2])


@pytest.mark.parametrize("kw", [
    {"informative_index": 4},
    {"informative_index": -1},
    {"n_samples": 0},
    {"scale": float("inf")},
    {"scale": float("nan")},
])
def test_spec_validation(kw):
    with pytest.raises(ValueError):
        DatasetSpec(Activation.RELU, **kw)


def test_split_sizes():
    train, test = split(generate(DatasetSpec(Activation.RELU)), 0.8, 0)
    assert (len(train), len(test)) == (2048, 512)


def test_split_is_deterministic():
    data = generate(DatasetSpec(Activation.RELU, n_samples=100))
    a, _ = split(data, 0.8, 5)
    b, _ = split(data, 0.8, 5)
    c, _ = split(data, 0.8, 6)
    assert np.array_equal(a.X, b.X)
    assert not np.array_equal(a.X, c.X)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 300), frac=st.floats(0.05, 0.95), seed=st.integers(0, 2**32))
def test_split_is_a_partition(n, frac, seed):
    data = generate(DatasetSpec(Activation.TANH, n_samples=n, seed=seed % 97))
    try:
        train, test = split(data, frac, seed)
    except ValueError:
        assert round(frac * n) in (0, n)
        return
    rows = lambda d: sorted(map(tuple, np.column_stack([d.X, d.y])))
    assert len(train) + len(test) == n
    assert sorted(rows(train) + rows(test)) == rows(data)
    spec = DatasetSpec(Activation.TANH)
    for half in (train, test):
        assert np.array_equal(half.y, labels(spec, half.X))


@pytest.mark.parametrize("frac", [0.0, 1.0, -0.2, 1.5])
def test_split_rejects_bad_fraction(frac):
    with pytest.raises(ValueError):
        split(generate(DatasetSpec(Activation.RELU, n_samples=10)), frac, 0)


def test_split_rejects_empty_half():
    with pytest.raises(ValueError):
        split(generate(DatasetSpec(Activation.RELU, n_samples=1)), 0.5, 0)


def test_csv_round_trip(tmp_path):
    data = generate(DatasetSpec(Activation.LRELU, n_samples=20, seed=4))
    path = tmp_path / "d.csv"
    data.to_csv(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x0", "x1", "x2", "x3", "y"]
    back = np.array(rows[1:], dtype=float)
    assert np.array_equal(back[:, :4], data.X)
    assert np.array_equal(back[:, 4], data.y)


def test_take_selects_rows():
    data = Dataset(np.arange(12.0).reshape(6, 2), np.arange(6.0))
    part = data.take([1, 4])
    assert np.array_equal(part.y, [1.0, 4.0])
    assert len(part) == 2
