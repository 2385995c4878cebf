"""Quantum feature maps: random Fourier features (RFF) and adaptive Fourier
features (AFF).

A sample x in R^D is mapped to

    z(x) = sqrt(2 / d) * cos(W x + b),    |psi> = z(x) / |z(x)|

where W (d x D) already carries the sqrt(2 gamma) scale of the Gaussian
kernel exp(-gamma |x - y|^2). AFF refines W and b with a siamese network whose
output |<psi_1|psi_2>|^2 is regressed onto the Gaussian kernel of the pair.
"""
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import torch
import torch.optim as optim
from absl import logging
from torch import nn
from tqdm import trange

from dmkde.errors import (
    DegenerateEmbeddingError, ParameterError, TrainingDivergedError)
from dmkde.io import read_json, write_json

TWO_PI = 2. * math.pi
PARAMS_FORMAT = 'dmkde.fourier_params'


def _as_matrix(X, dim=None):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1) if dim in (None, 1) else X.reshape(1, -1)
    if X.ndim != 2:
        raise ParameterError('expected a list of vectors, got shape %s' % (X.shape,))
    if dim is not None and X.shape[1] != dim:
        raise ParameterError(
            'dimension mismatch: expected D=%d, got %d' % (dim, X.shape[1]))
    if not np.all(np.isfinite(X)):
        raise ParameterError('input contains non-finite values')
    return X


@dataclass(frozen=True, eq=False)
class FourierParams:
    weights: np.ndarray
    bias: np.ndarray
    gamma: float

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64)
        bias = np.array(self.bias, dtype=np.float64).reshape(-1)
        if weights.ndim != 2 or weights.shape[0] < 1 or weights.shape[1] < 1:
            raise ParameterError('weights must be a d x D matrix, got %s' % (
                weights.shape,))
        if bias.shape[0] != weights.shape[0]:
            raise ParameterError('bias length %d does not match d=%d' % (
                bias.shape[0], weights.shape[0]))
        if not self.gamma > 0:
            raise ParameterError('gamma must be positive, got %r' % (self.gamma,))
        weights.setflags(write=False)
        bias.setflags(write=False)
        object.__setattr__(self, 'weights', weights)
        object.__setattr__(self, 'bias', bias)
        object.__setattr__(self, 'gamma', float(self.gamma))

    @property
    def dim_input(self):
        return self.weights.shape[1]

    @property
    def dim_features(self):
        return self.weights.shape[0]

    def to_dict(self):
        return {
            'format': PARAMS_FORMAT,
            'version': 1,
            'dim_input': self.dim_input,
            'dim_features': self.dim_features,
            'gamma': self.gamma,
            'weights': self.weights.tolist(),
            'bias': self.bias.tolist(),
        }

    @classmethod
    def from_dict(cls, document):
        params = cls(weights=document['weights'], bias=document['bias'],
                     gamma=document['gamma'])
        if (params.dim_input, params.dim_features) != (
                document['dim_input'], document['dim_features']):
            raise ParameterError('declared dimensions do not match the matrices')
        return params

    def save(self, path):
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path):
        return cls.from_dict(read_json(path, PARAMS_FORMAT))


@dataclass(frozen=True, eq=False)
class PairDataset:
    left: np.ndarray
    right: np.ndarray
    labels: np.ndarray
    gamma_s: float

    def __post_init__(self):
        if not (len(self.left) == len(self.right) == len(self.labels)):
            raise ParameterError('left, right and labels must have equal length')
        if not self.gamma_s > 0:
            raise ParameterError('gamma_s must be positive')

    def __len__(self):
        return len(self.labels)


def sample_rff(dim_input, dim_features, gamma, seed):
    """Draws W = sqrt(2 gamma) G with G ~ N(0, 1) and b ~ U[0, 2 pi)."""
    if int(dim_input) != dim_input or dim_input < 1:
        raise ParameterError('dim_input must be a positive integer, got %r' % (dim_input,))
    if int(dim_features) != dim_features or dim_features < 1:
        raise ParameterError('dim_features must be a positive integer, got %r' % (dim_features,))
    if not gamma > 0:
        raise ParameterError('gamma must be positive, got %r' % (gamma,))
    rng = np.random.default_rng(seed)
    weights = math.sqrt(2. * gamma) * rng.standard_normal((int(dim_features), int(dim_input)))
    bias = rng.uniform(0., TWO_PI, size=int(dim_features))
    return FourierParams(weights=weights, bias=bias, gamma=gamma)


def _cosine_features(params, X):
    return math.sqrt(2. / params.dim_features) * np.cos(
        X @ params.weights.T + params.bias)


def embed_batch(params, X):
    X = _as_matrix(X, params.dim_input)
    zs = _cosine_features(params, X)
    norms = np.linalg.norm(zs, axis=1, keepdims=True)
    degenerate = np.flatnonzero(norms[:, 0] == 0.)
    if degenerate.size:
        raise DegenerateEmbeddingError(
            'all cosine features vanish for sample %d' % degenerate[0])
    return zs / norms


def embed(params, x):
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.ndim != 1 or x.shape[0] != params.dim_input:
        raise ParameterError('dimension mismatch: expected D=%d, got %s' % (
            params.dim_input, x.shape))
    return embed_batch(params, x[None, :])[0]


def rff_kernel(params, x, y):
    """Unnormalized RFF inner product (2 / d) sum cos(Wx + b) cos(Wy + b)."""
    zx = _cosine_features(params, _as_matrix(x, params.dim_input))
    zy = _cosine_features(params, _as_matrix(y, params.dim_input))
    return np.sum(zx * zy, axis=1)


def gaussian_kernel(x, y, gamma):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    diff = x - y
    if diff.ndim == 0:
        diff = diff.reshape(1)
    return np.exp(-gamma * np.sum(diff * diff, axis=-1))


def build_synthetic_pairs(X, gamma_s, seed):
    """Two independent shuffles of X labelled with exp(-gamma_s |x1 - x2|^2)."""
    X = _as_matrix(X)
    if len(X) < 2:
        raise ParameterError('at least 2 samples are needed, got %d' % len(X))
    if not gamma_s > 0:
        raise ParameterError('gamma_s must be positive, got %r' % (gamma_s,))
    rng = np.random.default_rng(seed)
    left = X[rng.permutation(len(X))]
    right = X[rng.permutation(len(X))]
    labels = gaussian_kernel(left, right, gamma_s)
    return PairDataset(left=left, right=right, labels=labels, gamma_s=gamma_s)


class FourierFeatures(nn.Module):
    def __init__(self, params):
        super().__init__()
        self.gamma = params.gamma
        self.weights = nn.Parameter(
            torch.tensor(np.array(params.weights), dtype=torch.float64))
        self.bias = nn.Parameter(
            torch.tensor(np.array(params.bias), dtype=torch.float64))

    @property
    def dim_features(self):
        return self.weights.shape[0]

    def forward(self, xs):
        zs = math.sqrt(2. / self.dim_features) * torch.cos(
            xs @ self.weights.t() + self.bias)
        norms = zs.norm(dim=-1, keepdim=True)
        if (norms == 0).any():
            raise DegenerateEmbeddingError('all cosine features vanish')
        return zs / norms

    def to_params(self):
        return FourierParams(
            weights=self.weights.detach().cpu().numpy().copy(),
            bias=self.bias.detach().cpu().numpy().copy(),
            gamma=self.gamma)


class SiameseKernel(nn.Module):
    """Both branches share one FourierFeatures; outputs |<psi_1|psi_2>|^2."""

    def __init__(self, features):
        super().__init__()
        self.features = features

    def forward(self, left, right):
        psi_left = self.features(left)
        psi_right = self.features(right)
        return (psi_left * psi_right).sum(dim=-1).pow(2)


def _pair_tensors(pairs, dim_input):
    left = _as_matrix(pairs.left, dim_input)
    right = _as_matrix(pairs.right, dim_input)
    return (torch.from_numpy(left), torch.from_numpy(right),
            torch.from_numpy(np.asarray(pairs.labels, dtype=np.float64)))


def aff_loss(params, pairs):
    if len(pairs) == 0:
        raise ParameterError('empty pair dataset')
    model = SiameseKernel(FourierFeatures(params))
    left, right, labels = _pair_tensors(pairs, params.dim_input)
    with torch.no_grad():
        loss = nn.MSELoss()(model(left, right), labels)
    return loss.item()


def aff_grad(params, pairs):
    """Gradient of aff_loss with respect to (weights, bias), by autograd."""
    if len(pairs) == 0:
        raise ParameterError('empty pair dataset')
    model = SiameseKernel(FourierFeatures(params))
    left, right, labels = _pair_tensors(pairs, params.dim_input)
    loss = nn.MSELoss()(model(left, right), labels)
    loss.backward()
    return (model.features.weights.grad.numpy().copy(),
            model.features.bias.grad.numpy().copy())


@dataclass(frozen=True)
class AffTrainConfig:
    dim_features: int = 4
    gamma: float = 2. ** -7
    gamma_s: float = 2. ** -6
    epochs: int = 50
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ParameterError('epochs must be positive')
        if not self.lr > 0:
            raise ParameterError('learning rate must be positive')
        if self.batch_size < 1:
            raise ParameterError('batch size must be positive')
        if self.dim_features < 1:
            raise ParameterError('dim_features must be positive')
        if not (self.gamma > 0 and self.gamma_s > 0):
            raise ParameterError('gamma and gamma_s must be positive')


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    best_loss: float


class AffTrainer:
    """Mini-batch Adam on the siamese MSE objective.

    Epoch 0 is the RFF initialization; the parameters with the lowest
    full-dataset loss seen so far are kept and returned.
    """

    def __init__(self, X, config, writer=None, verbose=True):
        X = _as_matrix(X)
        if len(X) < 2:
            raise ParameterError('at least 2 samples are needed, got %d' % len(X))
        self.config = config
        self.writer = writer
        self.verbose = verbose
        pair_seed, init_seed, shuffle_seed = (
            int(s) for s in np.random.SeedSequence(config.seed).generate_state(3))

        self.pairs = build_synthetic_pairs(X, config.gamma_s, seed=pair_seed)
        init = sample_rff(X.shape[1], config.dim_features, config.gamma, seed=init_seed)
        self.model = SiameseKernel(FourierFeatures(init))
        self.optim = optim.Adam(
            self.model.parameters(), lr=config.lr,
            betas=(config.beta1, config.beta2))
        self.loss_fn = nn.MSELoss()
        self.generator = torch.Generator().manual_seed(shuffle_seed)
        self.left, self.right, self.labels = _pair_tensors(self.pairs, X.shape[1])

        self.history: List[EpochRecord] = []
        self.best_params: Optional[FourierParams] = None
        self.best_loss = math.inf

    def evaluate(self):
        with torch.no_grad():
            loss = self.loss_fn(self.model(self.left, self.right), self.labels)
        return loss.item()

    def train_step(self, idx):
        self.optim.zero_grad()
        preds = self.model(self.left[idx], self.right[idx])
        loss = self.loss_fn(preds, self.labels[idx])
        loss.backward()
        self.optim.step()
        return loss.detach()

    def _record(self, epoch, loss):
        if not math.isfinite(loss):
            raise TrainingDivergedError(epoch, loss)
        if loss < self.best_loss:
            self.best_loss = loss
            self.best_params = self.model.features.to_params()
        self.history.append(EpochRecord(epoch, loss, self.best_loss))
        if self.writer is not None:
            self.writer.add_scalar('train_loss', loss, epoch)
            self.writer.add_scalar('best_loss', self.best_loss, epoch)

    def train(self):
        num_pairs = len(self.pairs)
        self._record(0, self.evaluate())
        initial_loss = self.best_loss

        with trange(1, self.config.epochs + 1, dynamic_ncols=True,
                    disable=not self.verbose) as pbar:
            for epoch in pbar:
                perm = torch.randperm(num_pairs, generator=self.generator)
                for start in range(0, num_pairs, self.config.batch_size):
                    self.train_step(perm[start:start + self.config.batch_size])
                self._record(epoch, self.evaluate())
                pbar.set_description('Epoch %d, loss: %.6f, best: %.6f' % (
                    epoch, self.history[-1].loss, self.best_loss))

        if self.writer is not None:
            self.writer.flush()
        logging.info('AFF training: initial loss %.6f, best loss %.6f',
                     initial_loss, self.best_loss)
        return self.best_params


def train_aff(X, config, writer=None, verbose=True):
    return AffTrainer(X, config, writer=writer, verbose=verbose).train()
