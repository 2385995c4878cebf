from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import pandas as pd
from sklearn.metrics import accuracy_score, f1_score, roc_auc_score

from dmkde.dataset import NORMAL, OUTLIER
from dmkde.errors import ParameterError, UndefinedMetricError, stage
from dmkde.io import write_json

METRICS = ('accuracy', 'f1_outlier', 'auc')


def select_threshold(val_densities, outlier_rate):
    """Empirical quantile of the validation densities at `outlier_rate`, with
    linear interpolation between order statistics."""
    densities = np.asarray(val_densities, dtype=np.float64).reshape(-1)
    if densities.size == 0:
        raise ParameterError('no validation densities')
    if not 0. < outlier_rate < 1.:
        raise ParameterError('outlier rate must lie in (0, 1), got %r' % (outlier_rate,))
    return float(np.quantile(densities, outlier_rate))


def classify(test_densities, threshold):
    densities = np.asarray(test_densities, dtype=np.float64)
    return np.where(densities < threshold, OUTLIER, NORMAL)


def metrics(predictions, truth, scores):
    """(accuracy, F1 of the outlier class, AUC).

    `scores` are densities; the anomaly score fed to the ROC is -density, so
    the AUC is the probability that a random outlier has a lower density than
    a random normal sample, ties counting 1/2.
    """
    predictions = np.asarray(predictions)
    truth = np.asarray(truth)
    scores = np.asarray(scores, dtype=np.float64)
    if not (predictions.shape == truth.shape == scores.shape):
        raise ParameterError('predictions, truth and scores must have equal length')
    if len(np.unique(truth)) < 2:
        raise UndefinedMetricError('AUC and F1 need both classes in the ground truth')
    accuracy = accuracy_score(truth, predictions)
    f1 = f1_score(truth, predictions, pos_label=OUTLIER, zero_division=0)
    auc = roc_auc_score(truth == OUTLIER, -scores)
    return float(accuracy), float(f1), float(auc)


@dataclass
class DetectionReport:
    threshold: float
    densities_val: np.ndarray
    densities_test: np.ndarray
    truth: np.ndarray
    predictions: np.ndarray
    accuracy: float
    f1_outlier: float
    auc: float
    seed: Optional[int] = None
    shots: Optional[int] = None
    exact_test: Optional[np.ndarray] = None

    def metric_values(self):
        return {name: getattr(self, name) for name in METRICS}

    def samples_frame(self):
        frame = pd.DataFrame({
            'id': np.arange(len(self.densities_test)),
            'density': self.densities_test,
            'truth': self.truth,
            'prediction': self.predictions,
        })
        if self.exact_test is not None:
            frame['exact_density'] = self.exact_test
            frame['delta'] = self.densities_test - self.exact_test
        return frame

    def to_dict(self):
        document = {
            'threshold': self.threshold,
            'accuracy': self.accuracy,
            'f1_outlier': self.f1_outlier,
            'auc': self.auc,
            'seed': self.seed,
            'num_val': int(len(self.densities_val)),
            'num_test': int(len(self.densities_test)),
            'predicted_outliers': int((self.predictions == OUTLIER).sum()),
        }
        if self.shots is not None:
            document['shots'] = self.shots
            deltas = self.densities_test - self.exact_test
            document['max_abs_shot_delta'] = float(np.max(np.abs(deltas)))
        return document

    def to_json(self, path):
        write_json(path, self.to_dict())


def build_report(val_densities, test_densities, truth, outlier_rate, **kwargs):
    """Threshold at the validation percentile, classify the test set and score
    it; failures are tagged with the threshold or metrics stage."""
    with stage('threshold'):
        threshold = select_threshold(val_densities, outlier_rate)
        predictions = classify(test_densities, threshold)
    with stage('metrics'):
        accuracy, f1, auc = metrics(predictions, truth, test_densities)
    return DetectionReport(
        threshold=threshold,
        densities_val=np.asarray(val_densities, dtype=np.float64),
        densities_test=np.asarray(test_densities, dtype=np.float64),
        truth=np.asarray(truth),
        predictions=predictions,
        accuracy=accuracy, f1_outlier=f1, auc=auc, **kwargs)


def summarize(reports: List[DetectionReport]):
    """Mean and (population) standard deviation of every metric."""
    summary = {}
    for name in METRICS:
        values = np.array([getattr(r, name) for r in reports], dtype=np.float64)
        summary[name + '_mean'] = float(values.mean())
        summary[name + '_std'] = float(values.std())
    return summary


def format_table(rows):
    """Text table in the layout Size | Method | F1 Score | Accuracy | AUC.

    `rows` is a list of (size_label, method_label, summary) tuples where
    summary comes from `summarize`.
    """
    header = ('Size', 'Method', 'F1 Score', 'Accuracy', 'AUC')
    lines = [header]
    for size, method, summary in rows:
        lines.append((size, method) + tuple(
            '%.4f ± %.4f' % (summary[name + '_mean'], summary[name + '_std'])
            for name in ('f1_outlier', 'accuracy', 'auc')))
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    out = []
    for k, line in enumerate(lines):
        out.append(' | '.join(cell.ljust(w) for cell, w in zip(line, widths)))
        if k == 0:
            out.append('-+-'.join('-' * w for w in widths))
    return '\n'.join(out) + '\n'
