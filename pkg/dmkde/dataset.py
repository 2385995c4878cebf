import os
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from absl import logging
from scipy.stats import norm
from sklearn.model_selection import train_test_split
from sklearn.preprocessing import StandardScaler

from dmkde.errors import IngestionError, ParameterError

NORMAL = 0
OUTLIER = 1


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """samples: (N, D) array; labels: (N,) array of NORMAL / OUTLIER."""
    samples: np.ndarray
    labels: np.ndarray
    feature_names: Optional[List[str]] = None

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.shape[0] != labels.shape[0]:
            raise ParameterError('%d samples but %d labels' % (
                samples.shape[0], labels.shape[0]))
        if not np.isin(labels, (NORMAL, OUTLIER)).all():
            raise ParameterError('labels must be NORMAL (0) or OUTLIER (1)')
        object.__setattr__(self, 'samples', samples)
        object.__setattr__(self, 'labels', labels)

    def __len__(self):
        return self.labels.shape[0]

    @property
    def dim(self):
        return self.samples.shape[1]

    @property
    def outlier_fraction(self):
        return float(self.labels.mean()) if len(self) else 0.

    def subset(self, index):
        return LabeledDataset(self.samples[index], self.labels[index], self.feature_names)

    def with_samples(self, samples):
        return LabeledDataset(samples, self.labels, self.feature_names)


def load_csv(path, label_column=None, outlier_label='1', normal_label=None,
             delimiter=','):
    """Reads a header-ed delimited file of numeric features plus a label column.

    Rows are numbered from 1 (the first data row after the header). Without a
    label column every row is labelled NORMAL. When `normal_label` is given,
    labels other than `outlier_label` and `normal_label` are rejected.
    """
    if not os.path.exists(path):
        raise IngestionError('no such file: %s' % path)
    try:
        frame = pd.read_csv(path, sep=delimiter, dtype=str, keep_default_na=False,
                            skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise IngestionError('cannot parse %s: %s' % (path, e))

    if label_column:
        if label_column not in frame.columns:
            raise IngestionError('label column %r not found in %s' % (label_column, path))
        raw_labels = frame.pop(label_column).str.strip()
        accepted = {str(outlier_label)}
        if normal_label is not None:
            accepted.add(str(normal_label))
            unknown = ~raw_labels.isin(accepted)
            if unknown.any():
                row = int(np.flatnonzero(unknown.values)[0]) + 1
                raise IngestionError('unknown label %r' % raw_labels.iloc[row - 1],
                                     row=row, column=label_column)
        labels = np.where(raw_labels == str(outlier_label), OUTLIER, NORMAL)
    else:
        labels = np.full(len(frame), NORMAL)

    if frame.shape[1] == 0:
        raise IngestionError('%s has no feature columns' % path)
    numeric = frame.apply(lambda column: pd.to_numeric(column.str.strip(), errors='coerce'))
    bad = numeric.isna().values
    if bad.any():
        row, col = np.argwhere(bad)[0]
        column = frame.columns[col]
        raise IngestionError('non-numeric cell %r' % frame.iloc[row, col],
                             row=int(row) + 1, column=column)

    dataset = LabeledDataset(numeric.values.astype(np.float64), labels,
                             feature_names=list(frame.columns))
    balance = class_balance(dataset.labels)
    logging.info('Loaded %s: N=%d, D=%d, normal=%d, outliers=%d (%.2f%%)', path,
                 len(dataset), dataset.dim, balance['normal'], balance['outlier'],
                 100 * balance['outlier_fraction'])
    return dataset


def standardize(dataset):
    """Z-scores features with statistics of `dataset` (the training partition);
    returns the scaled dataset and the fitted scaler for val / test."""
    if len(dataset) < 2:
        raise ParameterError('standardization needs at least 2 samples')
    scaler = StandardScaler().fit(dataset.samples)
    return dataset.with_samples(scaler.transform(dataset.samples)), scaler


def apply_scaler(dataset, scaler):
    return dataset.with_samples(scaler.transform(dataset.samples))


@dataclass(frozen=True)
class SplitSpec:
    train_frac: float = 0.6
    val_frac: float = 0.2
    test_frac: float = 0.2
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        fracs = (self.train_frac, self.val_frac, self.test_frac)
        if min(fracs) <= 0:
            raise ParameterError('split fractions must be positive')
        if abs(sum(fracs) - 1.) > 1e-9:
            raise ParameterError('split fractions must sum to 1, got %r' % (sum(fracs),))


def split(dataset, spec):
    """Disjoint, exhaustive train / val / test partitions.

    Stratified splits keep the outlier fraction of every partition within
    rounding of the full dataset and require both classes in each.
    """
    index = np.arange(len(dataset))
    stratify = dataset.labels if spec.stratified else None
    holdout = spec.val_frac + spec.test_frac
    try:
        train_idx, rest_idx = train_test_split(
            index, test_size=holdout, random_state=spec.seed, shuffle=True,
            stratify=stratify)
        rest_stratify = dataset.labels[rest_idx] if spec.stratified else None
        val_idx, test_idx = train_test_split(
            rest_idx, test_size=spec.test_frac / holdout, random_state=spec.seed,
            shuffle=True, stratify=rest_stratify)
    except ValueError as e:
        raise ParameterError('infeasible split: %s' % e)

    partitions = tuple(dataset.subset(np.sort(idx)) for idx in (train_idx, val_idx, test_idx))
    if spec.stratified:
        for name, part in zip(('train', 'val', 'test'), partitions):
            if len(np.unique(part.labels)) < 2:
                raise ParameterError('infeasible stratification: %s partition '
                                     'lacks a class' % name)
    logging.info('Split sizes train/val/test = %d/%d/%d', *[len(p) for p in partitions])
    return partitions


@dataclass(frozen=True)
class GaussianMixture1D:
    weights: Sequence[float] = (0.5, 0.5)
    means: Sequence[float] = (-2., 2.)
    stds: Sequence[float] = (1., 1.)

    def __post_init__(self):
        if not (len(self.weights) == len(self.means) == len(self.stds)):
            raise ParameterError('mixture weights, means and stds must align')
        if min(self.stds) <= 0 or min(self.weights) < 0:
            raise ParameterError('invalid mixture parameters')
        if abs(sum(self.weights) - 1.) > 1e-9:
            raise ParameterError('mixture weights must sum to 1')

    def sample(self, num, rng):
        component = rng.choice(len(self.weights), size=num, p=np.asarray(self.weights))
        means = np.asarray(self.means)[component]
        stds = np.asarray(self.stds)[component]
        return rng.normal(means, stds)

    def pdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        return sum(w * norm.pdf(x, loc=m, scale=s)
                   for w, m, s in zip(self.weights, self.means, self.stds))

    def bounds(self):
        return (min(m - 3 * s for m, s in zip(self.means, self.stds)),
                max(m + 3 * s for m, s in zip(self.means, self.stds)))

    def grid(self, num=250):
        start, stop = self.bounds()
        return np.linspace(start, stop, num)


def mixture_from_lists(weights, means, stds):
    try:
        values = [tuple(float(v) for v in vs) for vs in (weights, means, stds)]
    except ValueError as e:
        raise ParameterError('invalid mixture parameter: %s' % e)
    return GaussianMixture1D(*values)


def class_balance(labels):
    labels = np.asarray(labels)
    total = max(len(labels), 1)
    outliers = int((labels == OUTLIER).sum())
    return {'normal': len(labels) - outliers, 'outlier': outliers,
            'outlier_fraction': outliers / total}
