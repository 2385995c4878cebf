from unittest import mock

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.integrate import trapezoid

from dmkde import dataset as dataset_module
from dmkde.dataset import (
    NORMAL, OUTLIER, GaussianMixture1D, LabeledDataset, SplitSpec, apply_scaler,
    class_balance, load_csv, mixture_from_lists, split, standardize)
from dmkde.errors import IngestionError, ParameterError


def write(tmp_path, text, name='data.csv'):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_load_csv(tmp_path):
    path = write(tmp_path, 'a,b,class\n1,2,n\n3.5,-4,o\n0,1e-3,n\n')
    dataset = load_csv(path, label_column='class', outlier_label='o')
    assert dataset.feature_names == ['a', 'b']
    assert_allclose(dataset.samples, [[1, 2], [3.5, -4], [0, 1e-3]])
    np.testing.assert_array_equal(dataset.labels, [NORMAL, OUTLIER, NORMAL])


def test_load_csv_without_labels(tmp_path):
    dataset = load_csv(write(tmp_path, 'x\n1\n2\n'))
    assert dataset.dim == 1
    assert dataset.outlier_fraction == 0.


def test_non_numeric_cell_is_located(tmp_path):
    path = write(tmp_path, 'a,b,label\n1,2,0\n3,x,1\n')
    with pytest.raises(IngestionError) as info:
        load_csv(path, label_column='label')
    assert (info.value.row, info.value.column) == (2, 'b')
    assert "(row 2, column 'b')" in str(info.value)


def test_empty_cell_is_rejected(tmp_path):
    with pytest.raises(IngestionError) as info:
        load_csv(write(tmp_path, 'a,b\n1,\n'))
    assert info.value.row == 1


def test_unknown_label(tmp_path):
    path = write(tmp_path, 'a,label\n1,0\n2,1\n3,2\n')
    with pytest.raises(IngestionError) as info:
        load_csv(path, label_column='label', outlier_label='1', normal_label='0')
    assert (info.value.row, info.value.column) == (3, 'label')
    # without normal_label every other value counts as normal
    assert load_csv(path, label_column='label').labels.tolist() == [0, 1, 0]


def test_missing_inputs(tmp_path):
    with pytest.raises(IngestionError):
        load_csv(str(tmp_path / 'missing.csv'))
    with pytest.raises(IngestionError):
        load_csv(write(tmp_path, 'a,b\n1,2\n'), label_column='label')


def test_standardize_uses_train_statistics():
    rng = np.random.default_rng(0)
    train = LabeledDataset(rng.normal(5., 2., (200, 3)), np.zeros(200))
    val = LabeledDataset(rng.normal(8., 2., (50, 3)), np.zeros(50))
    scaled, scaler = standardize(train)
    assert_allclose(scaled.samples.mean(axis=0), 0., atol=1e-12)
    assert_allclose(scaled.samples.std(axis=0), 1., atol=1e-12)
    assert np.all(apply_scaler(val, scaler).samples.mean(axis=0) > 1.)


def cardio_like(n=1831, outliers=176):
    labels = np.zeros(n, dtype=int)
    labels[np.random.default_rng(0).choice(n, outliers, replace=False)] = OUTLIER
    return LabeledDataset(np.arange(n, dtype=float)[:, None], labels)


def test_stratified_split_sizes_and_fractions():
    dataset = cardio_like()
    parts = split(dataset, SplitSpec())
    for part, expected in zip(parts, (1099, 366, 366)):
        assert abs(len(part) - expected) <= 1
        assert abs(part.outlier_fraction - dataset.outlier_fraction) <= 1. / len(part)
    ids = np.concatenate([part.samples[:, 0] for part in parts])
    assert sorted(ids.tolist()) == list(range(len(dataset)))


def test_split_is_deterministic():
    dataset = cardio_like()
    first = split(dataset, SplitSpec(seed=4))
    second = split(dataset, SplitSpec(seed=4))
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.samples, b.samples)


def test_infeasible_split():
    dataset = LabeledDataset(np.arange(5.)[:, None], [0, 0, 0, 0, 1])
    with pytest.raises(ParameterError):
        split(dataset, SplitSpec())
    with pytest.raises(ParameterError):
        SplitSpec(train_frac=0.5, val_frac=0.2, test_frac=0.2)


def test_labeled_dataset_validation():
    with pytest.raises(ParameterError):
        LabeledDataset(np.zeros((3, 2)), [0, 1])
    with pytest.raises(ParameterError):
        LabeledDataset(np.zeros((2, 2)), [0, 2])


def test_mixture():
    mixture = GaussianMixture1D()
    grid = mixture.grid()
    assert len(grid) == 250
    assert (grid[0], grid[-1]) == (-5., 5.)
    assert trapezoid(mixture.pdf(grid), grid) == pytest.approx(1., abs=0.01)
    draws = mixture.sample(20000, np.random.default_rng(0))
    assert abs(draws.mean()) < 0.1
    assert draws.std() == pytest.approx(np.sqrt(5.), rel=0.05)


def test_mixture_from_lists():
    mixture = mixture_from_lists(['0.3', '0.7'], ['0', '1'], ['1', '2'])
    assert mixture.weights == (0.3, 0.7)
    with pytest.raises(ParameterError):
        mixture_from_lists(['a'], ['0'], ['1'])
    with pytest.raises(ParameterError):
        mixture_from_lists(['0.5'], ['0'], ['1'])


def test_class_balance():
    assert class_balance([0, 1, 0, 0]) == {'normal': 3, 'outlier': 1, 'outlier_fraction': 0.25}


def test_load_csv_logs_class_balance(tmp_path):
    path = write(tmp_path, 'a,label\n1,0\n2,0\n3,1\n')
    with mock.patch.object(dataset_module.logging, 'info') as info:
        load_csv(path, label_column='label', outlier_label='1', normal_label='0')
    args = info.call_args[0]
    assert args[4:6] == (2, 1)
