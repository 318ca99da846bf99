"""Synthetic regression task: ``y = a(k * x[informative])`` with Gaussian distractors."""

import csv
from dataclasses import dataclass

import numpy as np

from .activations import LEAKY_SLOPE, Activation, apply
from .numkit import Rng


@dataclass(frozen=True)
class DatasetSpec:
    truth: Activation
    scale: float = 5.0
    n_samples: int = 2560
    d_in: int = 4
    informative_index: int = 0
    seed: int = 0
    slope: float = LEAKY_SLOPE

    def __post_init__(self):
        if not 0 <= self.informative_index < self.d_in:
            raise ValueError("informative_index out of range")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not np.isfinite(self.scale):
            raise ValueError("scale must be finite")


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray

    def __len__(self):
        return self.X.shape[0]

    def take(self, rows) -> "Dataset":
        return Dataset(self.X[rows], self.y[rows])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(self.X.shape[1])] + ["y"])
            for row, target in zip(self.X, self.y):
                w.writerow([repr(float(v)) for v in row] + [repr(float(target))])


def labels(spec: DatasetSpec, X) -> np.ndarray:
    return apply(spec.truth, spec.scale * X[:, spec.informative_index], spec.slope)


def generate(spec: DatasetSpec) -> Dataset:
    X = Rng(spec.seed, stream=0).normal((spec.n_samples, spec.d_in))
    return Dataset(X, labels(spec, X))


def split(data: Dataset, train_fraction: float = 0.8, seed: int = 0):
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = len(data)
    n_train = int(round(train_fraction * n))
    if n_train == 0 or n_train == n:
        raise ValueError(f"split of {n} rows at {train_fraction} leaves an empty half")
    order = Rng(seed, stream=2).permutation(n)
    return data.take(np.sort(order[:n_train])), data.take(np.sort(order[n_train:]))
