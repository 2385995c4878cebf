"""Experiment orchestration: embedding, training, density estimation through a
chosen backend, percentile thresholding and metrics.

Backends:
    classical        - linear algebra on the density model
    simulator-exact  - exact P(|0>) of the simulated circuit, one run per sample
    simulator-shots  - the same circuits measured `shots` times
"""
import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from absl import logging
from joblib import Parallel, delayed
from scipy.integrate import trapezoid
from tqdm import tqdm

from dmkde.dataset import (
    GaussianMixture1D, SplitSpec, apply_scaler, load_csv, split, standardize)
from dmkde.density import (
    EstimatorConfig, PureModel, estimate_batch, parzen_density, train_mixed,
    train_pure, with_normalization)
from dmkde.errors import DmkdeError, ParameterError, stage
from dmkde.evaluation import METRICS, DetectionReport, build_report, summarize
from dmkde.features import (
    AffTrainConfig, FourierParams, embed_batch, sample_rff, train_aff)
from dmkde.qsim import run_mixed_circuit, run_pure_circuit

BACKENDS = ('classical', 'simulator-exact', 'simulator-shots')
EMBEDDINGS = ('rff', 'aff', 'file')
STATES = ('pure', 'mixed')
STATE_CHOICES = STATES + ('both',)


def _run_circuit(model, psi, shots, seed):
    if isinstance(model, PureModel):
        return run_pure_circuit(model, psi, shots=shots, seed=seed)
    return run_mixed_circuit(model, psi, shots=shots, seed=seed)


def estimate_densities(model, features, backend='classical', shots=0, seed=0,
                       n_jobs=1, cfg=None):
    """Returns (densities, exact_densities) for every row of `features`.

    For the circuit backends the pure-state density is sqrt(P(|0>_n)) and the
    mixed-state density is P(|0>_n) of the first register. Per-sample seeds are
    spawned from `seed`; results keep the input order.
    """
    if backend not in BACKENDS:
        raise ParameterError('unknown backend %r, expected one of %s' % (backend, BACKENDS))
    features = np.asarray(features, dtype=np.float64)
    if backend == 'classical':
        densities = estimate_batch(model, features, cfg)
        return densities, densities
    if backend == 'simulator-shots' and shots <= 0:
        raise ParameterError('simulator-shots needs a positive shot count')

    run_shots = shots if backend == 'simulator-shots' else 0
    seeds = np.random.SeedSequence(seed).spawn(len(features))
    results = Parallel(n_jobs=n_jobs)(
        delayed(_run_circuit)(model, psi, run_shots, s)
        for psi, s in zip(features, seeds))
    exact = np.array([r[0] for r in results])
    measured = np.array([r[1] for r in results]) if run_shots else exact
    if isinstance(model, PureModel):
        exact, measured = np.sqrt(exact), np.sqrt(measured)
    scale = cfg.scale if cfg is not None else 1.
    return scale * measured, scale * exact


def train_model(state, features, solver='jacobi'):
    if state == 'pure':
        return train_pure(features)
    if state == 'mixed':
        return train_mixed(features, solver=solver)
    raise ParameterError('unknown state %r, expected pure or mixed' % (state,))


@dataclass(frozen=True)
class ExperimentConfig:
    data_path: str = ''
    label_column: str = ''
    outlier_label: str = '1'
    normal_label: Optional[str] = None
    embedding: str = 'aff'
    params_path: str = ''
    state: str = 'mixed'
    dim_features: int = 4
    gamma: float = 2. ** -7
    gamma_s: float = 2. ** -6
    aff_epochs: int = 50
    aff_lr: float = 1e-3
    aff_beta1: float = 0.9
    aff_beta2: float = 0.999
    aff_batch_size: int = 64
    backend: str = 'simulator-exact'
    shots: int = 8192
    seed: int = 0
    repeats: int = 1
    outlier_rate: float = 0.096
    standardize: bool = True
    split: SplitSpec = field(default_factory=SplitSpec)
    solver: str = 'jacobi'
    n_jobs: int = 1
    verbose: bool = False

    def __post_init__(self):
        if self.embedding not in EMBEDDINGS:
            raise ParameterError('unknown embedding %r' % self.embedding)
        if self.state not in STATE_CHOICES:
            raise ParameterError('unknown state %r' % self.state)
        if self.backend not in BACKENDS:
            raise ParameterError('unknown backend %r' % self.backend)
        if self.repeats < 1:
            raise ParameterError('repeats must be positive')
        if self.embedding == 'file' and not self.params_path:
            raise ParameterError('embedding=file needs params_path')

    def aff_config(self, seed):
        return AffTrainConfig(
            dim_features=self.dim_features, gamma=self.gamma, gamma_s=self.gamma_s,
            epochs=self.aff_epochs, lr=self.aff_lr, beta1=self.aff_beta1,
            beta2=self.aff_beta2, batch_size=self.aff_batch_size, seed=seed)

    @property
    def states(self):
        return STATES if self.state == 'both' else (self.state,)

    @property
    def label(self):
        size = '%s: %d' % (self.embedding.upper(), self.dim_features)
        return size, self.state.capitalize()


def build_embedding(config, train_samples, seed):
    if config.embedding == 'rff':
        return sample_rff(train_samples.shape[1], config.dim_features, config.gamma, seed)
    if config.embedding == 'aff':
        return train_aff(train_samples, config.aff_config(seed), verbose=config.verbose)
    params = FourierParams.load(config.params_path)
    if params.dim_input != train_samples.shape[1]:
        raise ParameterError('params expect D=%d, data has D=%d' % (
            params.dim_input, train_samples.shape[1]))
    return params


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    reports: List[DetectionReport]
    summary: Dict[str, float]

    def to_dict(self):
        size, method = self.config.label
        return {
            'size': size,
            'method': method,
            'backend': self.config.backend,
            'repeats': len(self.reports),
            'summary': self.summary,
            'runs': [r.to_dict() for r in self.reports],
        }


def prepare_partitions(config, dataset=None):
    with stage('load'):
        if dataset is None:
            dataset = load_csv(config.data_path, config.label_column,
                               config.outlier_label, config.normal_label)
    with stage('split'):
        train, val, test = split(dataset, config.split)
    if config.standardize:
        with stage('standardize'):
            train, scaler = standardize(train)
            val, test = apply_scaler(val, scaler), apply_scaler(test, scaler)
    return train, val, test


def run_repeat(config, train, val, test, seed):
    """One embedding shared by every state in `config.states`; returns a
    DetectionReport per state."""
    with stage('embed'):
        params = build_embedding(config, train.samples, seed)
        f_train = embed_batch(params, train.samples)
        f_val = embed_batch(params, val.samples)
        f_test = embed_batch(params, test.samples)

    shot_backend = config.backend == 'simulator-shots'
    reports = {}
    for state in config.states:
        with stage('train'):
            model = train_model(state, f_train, config.solver)
        with stage('estimate'):
            dens_val, _ = estimate_densities(
                model, f_val, config.backend, config.shots, seed=[seed, 1],
                n_jobs=config.n_jobs)
            dens_test, exact_test = estimate_densities(
                model, f_test, config.backend, config.shots, seed=[seed, 2],
                n_jobs=config.n_jobs)
        reports[state] = build_report(
            dens_val, dens_test, test.labels, config.outlier_rate, seed=seed,
            shots=config.shots if shot_backend else None,
            exact_test=exact_test if shot_backend else None)
    return reports


def run_experiments(config, dataset=None):
    """Embed, train, estimate and threshold `config.repeats` times on one fixed
    split; each repeat re-draws the RFF / re-initializes the AFF with
    seed + repeat. Returns one ExperimentReport per state, in `config.states`
    order, all built on the same features."""
    train, val, test = prepare_partitions(config, dataset)
    runs = {state: [] for state in config.states}
    for repeat in tqdm(range(config.repeats), dynamic_ncols=True,
                       disable=not config.verbose, desc='repeats'):
        for state, report in run_repeat(
                config, train, val, test, config.seed + repeat).items():
            runs[state].append(report)

    results = []
    for state, reports in runs.items():
        summary = summarize(reports)
        state_config = dataclasses.replace(config, state=state)
        size, method = state_config.label
        logging.info('%s %s (%s, %d repeats): AUC %.4f ± %.4f, F1 %.4f ± %.4f, '
                     'accuracy %.4f ± %.4f', size, method, config.backend,
                     config.repeats, summary['auc_mean'], summary['auc_std'],
                     summary['f1_outlier_mean'], summary['f1_outlier_std'],
                     summary['accuracy_mean'], summary['accuracy_std'])
        results.append(ExperimentReport(config=state_config, reports=reports,
                                        summary=summary))
    return results


def run_experiment(config, dataset=None):
    if len(config.states) != 1:
        raise ParameterError('run_experiment takes one state, got %r' % config.state)
    return run_experiments(config, dataset)[0]


@dataclass(frozen=True)
class SweepGrid:
    embeddings: Tuple[str, ...] = ('rff',)
    dims: Tuple[int, ...] = (4,)
    states: Tuple[str, ...] = ('mixed',)
    gamma_exponents: Tuple[int, ...] = tuple(range(-10, 1))

    def configurations(self):
        combos = list(itertools.product(
            self.embeddings, self.dims, self.states, self.gamma_exponents))
        if not combos:
            raise ParameterError('empty sweep grid')
        return combos


def run_sweep(base, grid, dataset=None):
    """One row per (embedding, d, state, gamma) in grid order. A failing
    configuration is recorded with status 'failed' and the sweep goes on."""
    combos = grid.configurations()
    if dataset is None:
        with stage('load'):
            dataset = load_csv(base.data_path, base.label_column,
                               base.outlier_label, base.normal_label)
    rows = []
    for embedding, dim, state, exponent in tqdm(combos, dynamic_ncols=True,
                                                disable=not base.verbose):
        row = {'embedding': embedding, 'dim_features': dim, 'state': state,
               'gamma_exponent': exponent, 'gamma': 2. ** exponent}
        try:
            config = dataclasses.replace(
                base, embedding=embedding, dim_features=dim, state=state,
                gamma=2. ** exponent)
            summary = run_experiment(config, dataset=dataset).summary
            row.update(status='ok', error='')
            row.update(summary)
        except DmkdeError as e:
            logging.warning('sweep row %s/%d/%s/2^%d failed: %s',
                            embedding, dim, state, exponent, e)
            row.update(status='failed', error=str(e))
            row.update({name + suffix: np.nan for name in METRICS
                        for suffix in ('_mean', '_std')})
        rows.append(row)
    return pd.DataFrame(rows)


@dataclass(frozen=True)
class DensityExperimentConfig:
    mixture: GaussianMixture1D = field(default_factory=GaussianMixture1D)
    num_train: int = 1000
    grid_points: int = 250
    embeddings: Tuple[str, ...] = ('rff', 'aff')
    dim_features: int = 16
    gamma: float = 1.
    gamma_s: float = 1.
    aff_epochs: int = 50
    aff_lr: float = 1e-3
    aff_beta1: float = 0.9
    aff_beta2: float = 0.999
    aff_batch_size: int = 64
    rff_candidates: int = 1
    backend: str = 'classical'
    shots: int = 8192
    seed: int = 0
    solver: str = 'jacobi'
    n_jobs: int = 1
    verbose: bool = False

    def __post_init__(self):
        if not self.embeddings or any(e not in ('rff', 'aff') for e in self.embeddings):
            raise ParameterError('density embeddings must be rff and/or aff')
        if self.num_train < 2:
            raise ParameterError('num_train must be at least 2')
        if self.rff_candidates < 1:
            raise ParameterError('rff_candidates must be positive')

    def aff_config(self):
        return AffTrainConfig(
            dim_features=self.dim_features, gamma=self.gamma, gamma_s=self.gamma_s,
            epochs=self.aff_epochs, lr=self.aff_lr, beta1=self.aff_beta1,
            beta2=self.aff_beta2, batch_size=self.aff_batch_size, seed=self.seed)


def l1_distance(estimate, reference, grid):
    return float(trapezoid(np.abs(np.asarray(estimate) - np.asarray(reference)), grid))


def select_rff(config, train_x, grid, true_pdf, base_cfg):
    """Best of `config.rff_candidates` RFF draws, seeds seed, seed + 1, ...,
    ranked by the classical mixed-state L1 distance to the true pdf.

    Returns (params, seed).
    """
    if config.rff_candidates == 1:
        return sample_rff(1, config.dim_features, config.gamma, config.seed), config.seed
    best = None
    for seed in range(config.seed, config.seed + config.rff_candidates):
        params = sample_rff(1, config.dim_features, config.gamma, seed)
        model = train_mixed(embed_batch(params, train_x[:, None]), config.solver)
        cfg = with_normalization(model, params, base_cfg)
        densities = estimate_batch(model, embed_batch(params, grid[:, None]), cfg)
        distance = l1_distance(densities, true_pdf, grid)
        logging.debug('RFF candidate seed %d: mixed L1 %.4f', seed, distance)
        if best is None or distance < best[0]:
            best = (distance, params, seed)
    return best[1], best[2]


def run_density_experiment(config):
    """Density estimation of a 1D Gaussian mixture on an equidistant grid.

    Returns a DataFrame with columns x, <embedding>_pure, <embedding>_mixed,
    true_pdf and parzen, and a summary of L1 distances; every estimator is
    normalized to integrate to 1 over the grid.
    """
    rng = np.random.default_rng(config.seed)
    with stage('load'):
        train_x = config.mixture.sample(config.num_train, rng)
        grid = config.mixture.grid(config.grid_points)
        true_pdf = config.mixture.pdf(grid)
        parzen = parzen_density(train_x, grid, config.gamma)
        base_cfg = EstimatorConfig('numeric-grid', float(grid[0]), float(grid[-1]),
                                   len(grid))

    columns = {'x': grid}
    summary = {'num_train': config.num_train, 'grid_points': len(grid),
               'dim_features': config.dim_features, 'gamma': config.gamma,
               'seed': config.seed, 'backend': config.backend,
               'rff_candidates': config.rff_candidates}
    for embedding in config.embeddings:
        with stage('embed'):
            if embedding == 'rff':
                params, summary['rff_seed'] = select_rff(
                    config, train_x, grid, true_pdf, base_cfg)
            else:
                params = train_aff(train_x[:, None], config.aff_config(),
                                   verbose=config.verbose)
            f_train = embed_batch(params, train_x[:, None])
            f_grid = embed_batch(params, grid[:, None])
        for state in STATES:
            name = '%s_%s' % (embedding, state)
            with stage('train'):
                model = train_model(state, f_train, config.solver)
                cfg = with_normalization(model, params, base_cfg)
            with stage('estimate'):
                densities, _ = estimate_densities(
                    model, f_grid, config.backend, config.shots,
                    seed=[config.seed, len(columns)], n_jobs=config.n_jobs, cfg=cfg)
            columns[name] = densities
            summary[name + '_l1'] = l1_distance(densities, true_pdf, grid)
            summary[name + '_l1_parzen'] = l1_distance(densities, parzen, grid)
            summary[name + '_constant'] = cfg.constant
    columns['true_pdf'] = true_pdf
    columns['parzen'] = parzen
    for key, value in summary.items():
        if key.endswith('_l1'):
            logging.info('L1(%s, true pdf) = %.4f', key[:-3], value)
    return pd.DataFrame(columns), summary
