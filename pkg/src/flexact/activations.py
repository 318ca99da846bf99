"""Candidate activation catalog.

Catalog order is fixed: ReLU, Sigmoid, Tanh, LeakyReLU, Identity. Every
probability vector in the package is indexed in this order.
"""

import enum

import numpy as np

LEAKY_SLOPE = 0.01


class Activation(enum.IntEnum):
    RELU = 0
    SIGMOID = 1
    TANH = 2
    LRELU = 3
    IDENTITY = 4

    @property
    def key(self) -> str:
        return _KEYS[self]

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, name: str) -> "Activation":
        try:
            return _ALIASES[name.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown activation {name!r}") from None


CATALOG = tuple(Activation)
N_CANDIDATES = len(CATALOG)

_KEYS = {
    Activation.RELU: "relu",
    Activation.SIGMOID: "sigmoid",
    Activation.TANH: "tanh",
    Activation.LRELU: "lrelu",
    Activation.IDENTITY: "identity",
}
_LABELS = {
    Activation.RELU: "ReLU",
    Activation.SIGMOID: "Sigmoid",
    Activation.TANH: "Tanh",
    Activation.LRELU: "LeakyReLU",
    Activation.IDENTITY: "Identity",
}
_ALIASES = {k: a for a, k in _KEYS.items()}
_ALIASES.update({"leakyrelu": Activation.LRELU, "leaky_relu": Activation.LRELU, "id": Activation.IDENTITY})


def sigmoid(h):
    # split by sign so exp never overflows
    h = np.asarray(h, dtype=np.float64)
    out = np.empty_like(h)
    pos = h >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-h[pos]))
    e = np.exp(h[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def apply(kind: Activation, h, slope: float = LEAKY_SLOPE) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if kind == Activation.RELU:
        return np.maximum(h, 0.0)
    if kind == Activation.SIGMOID:
        return sigmoid(h)
    if kind == Activation.TANH:
        return np.tanh(h)
    if kind == Activation.LRELU:
        return np.where(h > 0, h, slope * h)
    if kind == Activation.IDENTITY:
        return h.copy()
    raise ValueError(f"unknown activation {kind!r}")


def derivative(kind: Activation, h, slope: float = LEAKY_SLOPE) -> np.ndarray:
    """Element-wise first derivative. At 0, ReLU gives 0 and LeakyReLU gives ``slope``."""
    h = np.asarray(h, dtype=np.float64)
    if kind == Activation.RELU:
        return (h > 0).astype(np.float64)
    if kind == Activation.SIGMOID:
        s = sigmoid(h)
        return s * (1.0 - s)
    if kind == Activation.TANH:
        t = np.tanh(h)
        return 1.0 - t * t
    if kind == Activation.LRELU:
        return np.where(h > 0, 1.0, slope)
    if kind == Activation.IDENTITY:
        return np.ones_like(h)
    raise ValueError(f"unknown activation {kind!r}")


def apply_all(h, slope: float = LEAKY_SLOPE) -> np.ndarray:
    """Stack of every candidate applied to ``h``; shape ``(5,) + h.shape``."""
    return np.stack([apply(k, h, slope) for k in CATALOG])


def derivative_all(h, slope: float = LEAKY_SLOPE) -> np.ndarray:
    return np.stack([derivative(k, h, slope) for k in CATALOG])
