"""Reproduction checks on the Cardiotocography outlier dataset.

Set DMKDE_CARDIO_CSV to a CSV with the 21 features and a label column
(DMKDE_CARDIO_LABEL, default "label", outliers marked "1").
"""
import os

import numpy as np
import pytest

from dmkde.dataset import load_csv
from dmkde.pipeline import ExperimentConfig, run_experiment

CARDIO_CSV = os.environ.get('DMKDE_CARDIO_CSV')

pytestmark = [
    pytest.mark.slow,
    pytest.mark.skipif(not CARDIO_CSV, reason='DMKDE_CARDIO_CSV is not set'),
]


@pytest.fixture(scope='module')
def cardio():
    return load_csv(CARDIO_CSV, os.environ.get('DMKDE_CARDIO_LABEL', 'label'))


@pytest.fixture(scope='module')
def results(cardio):
    runs = {}
    for embedding, dim in (('aff', 4), ('rff', 4), ('rff', 8)):
        config = ExperimentConfig(
            embedding=embedding, dim_features=dim, state='mixed', gamma=2. ** -7,
            gamma_s=2. ** -6, backend='simulator-exact', repeats=10)
        runs[embedding, dim] = run_experiment(config, dataset=cardio)
    return runs


def test_dataset_shape(cardio):
    assert len(cardio) == 1831
    assert cardio.dim == 21
    assert cardio.outlier_fraction == pytest.approx(0.096, abs=0.001)


def test_aff_reaches_high_auc(results):
    assert results['aff', 4].summary['auc_mean'] >= 0.90


def test_aff_beats_rff(results):
    gap = results['aff', 4].summary['auc_mean'] - results['rff', 4].summary['auc_mean']
    assert gap >= 0.10


def test_more_random_features_help(results):
    assert results['rff', 8].summary['auc_mean'] > results['rff', 4].summary['auc_mean']


def test_aff_is_more_consistent(results):
    for name in ('auc', 'f1_outlier', 'accuracy'):
        assert (results['aff', 4].summary[name + '_std']
                < results['rff', 4].summary[name + '_std'])


def test_pure_state_close_to_mixed(cardio):
    config = ExperimentConfig(embedding='aff', dim_features=4, state='pure',
                              backend='classical', repeats=3)
    aucs = [r.auc for r in run_experiment(config, dataset=cardio).reports]
    assert np.mean(aucs) >= 0.85
