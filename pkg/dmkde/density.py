"""Training density matrices and their probability-density estimators.

    pure:   |phi> = sum_i |psi_i> / |sum_i |psi_i>|,   p1(psi) = C1 |<phi|psi>|
    mixed:  rho = (1/N) sum_i |psi_i><psi_i|,         p2(psi) = C2 <psi|rho|psi>

The mixed estimator is evaluated through the spectral decomposition
rho = V diag(lambda) V^T as sum_i lambda_i <v_i|psi>^2, which is what the
mixed-state circuit measures.
"""
import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid
from sklearn.neighbors import KernelDensity

from dmkde.errors import (
    DegenerateModelError, EigenSolverError, ParameterError)
from dmkde.features import embed_batch
from dmkde.io import read_json, write_json
from modules.eigh import jacobi_eigh

EIGENVALUE_FLOOR = 1e-12
NORM_FLOOR = 1e-12
PURE_FORMAT = 'dmkde.pure_model'
MIXED_FORMAT = 'dmkde.mixed_model'
NORMALIZATIONS = ('none', 'numeric-grid')
SOLVERS = ('jacobi', 'lapack')


def _as_features(features):
    F = np.asarray(features, dtype=np.float64)
    if F.ndim == 1:
        F = F[None, :]
    if F.ndim != 2 or F.shape[0] == 0:
        raise ParameterError('expected a nonempty list of quantum features')
    return F


def _check_dim(model_dim, psi):
    psi = np.asarray(psi, dtype=np.float64)
    if psi.shape[-1] != model_dim:
        raise ParameterError('dimension mismatch: model has d=%d, state has %d' % (
            model_dim, psi.shape[-1]))
    return psi


@dataclass(frozen=True, eq=False)
class PureModel:
    phi: np.ndarray

    def __post_init__(self):
        phi = np.array(self.phi, dtype=np.float64).reshape(-1)
        if abs(np.linalg.norm(phi) - 1.) > 1e-9:
            raise ParameterError('phi must have unit norm')
        phi.setflags(write=False)
        object.__setattr__(self, 'phi', phi)

    @property
    def dim(self):
        return self.phi.shape[0]

    def save(self, path):
        write_json(path, {'format': PURE_FORMAT, 'version': 1,
                          'dim': self.dim, 'phi': self.phi.tolist()})

    @classmethod
    def load(cls, path):
        return cls(phi=read_json(path, PURE_FORMAT)['phi'])


@dataclass(frozen=True, eq=False)
class MixedModel:
    """rho with its spectral decomposition; eigenvectors are the columns of
    `eigenvectors`, eigenvalues sorted in descending order."""
    rho: np.ndarray
    eigenvectors: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=np.float64)
        vectors = np.array(self.eigenvectors, dtype=np.float64)
        values = np.array(self.eigenvalues, dtype=np.float64).reshape(-1)
        d = values.shape[0]
        if rho.shape != (d, d) or vectors.shape != (d, d):
            raise ParameterError('rho, eigenvectors and eigenvalues disagree on d')
        if np.any(values < 0) or abs(values.sum() - 1.) > 1e-9:
            raise ParameterError('eigenvalues must be non-negative and sum to 1')
        for name, value in (('rho', rho), ('eigenvectors', vectors),
                            ('eigenvalues', values)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def save(self, path):
        write_json(path, {
            'format': MIXED_FORMAT,
            'version': 1,
            'dim': self.dim,
            'rho': self.rho.tolist(),
            'eigenvectors': self.eigenvectors.tolist(),
            'eigenvalues': self.eigenvalues.tolist(),
        })

    @classmethod
    def load(cls, path):
        doc = read_json(path, MIXED_FORMAT)
        return cls(rho=doc['rho'], eigenvectors=doc['eigenvectors'],
                   eigenvalues=doc['eigenvalues'])


@dataclass(frozen=True)
class EstimatorConfig:
    normalization: str = 'none'
    grid_start: Optional[float] = None
    grid_stop: Optional[float] = None
    grid_points: int = 250
    constant: float = 1.

    def __post_init__(self):
        if self.normalization not in NORMALIZATIONS:
            raise ParameterError('unknown normalization %r' % self.normalization)
        if self.normalization == 'numeric-grid':
            if self.grid_start is None or self.grid_stop is None:
                raise ParameterError('numeric-grid normalization needs a grid')
            if not (math.isfinite(self.grid_start) and math.isfinite(self.grid_stop)
                    and self.grid_start < self.grid_stop):
                raise ParameterError('grid bounds must be finite with start < stop')
            if self.grid_points < 2:
                raise ParameterError('grid needs at least 2 points')
        if not self.constant > 0:
            raise ParameterError('normalization constant must be positive')

    @property
    def grid(self):
        return np.linspace(self.grid_start, self.grid_stop, self.grid_points)

    @property
    def scale(self):
        return self.constant if self.normalization == 'numeric-grid' else 1.


def train_pure(features):
    F = _as_features(features)
    total = F.sum(axis=0)
    norm = np.linalg.norm(total)
    if norm < NORM_FLOOR:
        raise DegenerateModelError('training states cancel to a zero vector')
    return PureModel(phi=total / norm)


def spectral_decomposition(rho, solver='jacobi'):
    """Eigen-decomposition with clamping, descending order and a sign rule.

    Eigenvalues below 1e-12 are set to 0 and the rest renormalized to sum 1;
    the first component of magnitude above 1e-12 of each eigenvector is made
    non-negative.
    """
    if solver == 'jacobi':
        values, vectors = jacobi_eigh(rho)
    elif solver == 'lapack':
        try:
            values, vectors = np.linalg.eigh(rho)
        except np.linalg.LinAlgError as e:
            raise EigenSolverError(str(e))
    else:
        raise ParameterError('unknown eigensolver %r' % solver)

    order = np.argsort(-values, kind='stable')
    values, vectors = values[order], vectors[:, order]
    values = np.where(values < EIGENVALUE_FLOOR, 0., values)
    total = values.sum()
    if total <= 0:
        raise DegenerateModelError('density matrix has no positive eigenvalue')
    values = values / total

    leading = np.argmax(np.abs(vectors) > EIGENVALUE_FLOOR, axis=0)
    signs = np.sign(vectors[leading, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.
    return values, vectors * signs


def train_mixed(features, solver='jacobi'):
    F = _as_features(features)
    rho = F.T @ F / F.shape[0]
    rho = 0.5 * (rho + rho.T)
    values, vectors = spectral_decomposition(rho, solver=solver)
    return MixedModel(rho=rho, eigenvectors=vectors, eigenvalues=values)


def estimate_pure_batch(model, features, cfg=None):
    F = _check_dim(model.dim, _as_features(features))
    scale = cfg.scale if cfg is not None else 1.
    return scale * np.abs(F @ model.phi)


def estimate_mixed_batch(model, features, cfg=None):
    F = _check_dim(model.dim, _as_features(features))
    scale = cfg.scale if cfg is not None else 1.
    projections = F @ model.eigenvectors
    return scale * (projections ** 2) @ model.eigenvalues


def estimate_pure(model, psi, cfg=None):
    psi = _check_dim(model.dim, psi)
    if psi.ndim != 1:
        raise ParameterError('expected a single state')
    return float(estimate_pure_batch(model, psi, cfg)[0])


def estimate_mixed(model, psi, cfg=None):
    psi = _check_dim(model.dim, psi)
    if psi.ndim != 1:
        raise ParameterError('expected a single state')
    return float(estimate_mixed_batch(model, psi, cfg)[0])


def estimate_batch(model, features, cfg=None):
    if isinstance(model, PureModel):
        return estimate_pure_batch(model, features, cfg)
    if isinstance(model, MixedModel):
        return estimate_mixed_batch(model, features, cfg)
    raise ParameterError('unknown model type %s' % type(model).__name__)


def normalize_numeric_1d(model, params, cfg):
    """1 / (trapezoidal integral of the unnormalized estimator over the grid)."""
    if params.dim_input != 1:
        raise ParameterError('numeric normalization needs D=1, got D=%d' % params.dim_input)
    if cfg.normalization != 'numeric-grid':
        raise ParameterError('estimator config has no numeric grid')
    grid = cfg.grid
    values = estimate_batch(model, embed_batch(params, grid[:, None]))
    integral = trapezoid(values, grid)
    if not integral > 0:
        raise DegenerateModelError('estimator integrates to %r over the grid' % integral)
    return 1. / integral


def with_normalization(model, params, cfg):
    return dataclasses.replace(cfg, constant=normalize_numeric_1d(model, params, cfg))


def parzen_density(train_x, points, gamma):
    """Parzen-Rosenblatt estimate with the squared kernel exp(-2 gamma |x-y|^2)
    that the mixed estimator approximates, i.e. a Gaussian window of
    bandwidth 1 / (2 sqrt(gamma))."""
    train_x = np.asarray(train_x, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    if train_x.ndim == 1:
        train_x = train_x[:, None]
    if points.ndim == 1:
        points = points[:, None]
    kde = KernelDensity(kernel='gaussian', bandwidth=1. / (2. * math.sqrt(gamma)))
    kde.fit(train_x)
    return np.exp(kde.score_samples(points))
