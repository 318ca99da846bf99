"""Gumbel-Softmax activation router with hand-written backward pass.

One noise vector (one entry per candidate) is drawn per forward pass and is
shared by every unit and every sample in that pass: the router makes a single
layer-wide choice that does not depend on the input.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .activations import CATALOG, LEAKY_SLOPE, N_CANDIDATES, Activation, apply_all, derivative_all
from .numkit import DimensionError, Rng

_layer_ids = itertools.count()


class StaleTapeError(RuntimeError):
    pass


def gumbel_from_uniform(u):
    return -np.log(-np.log(u))


def gumbel_noise(rng: Rng, size=None):
    return gumbel_from_uniform(rng.uniform_open(size))


def softmax(z):
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


def tempered_softmax(logits, noise, tau: float) -> np.ndarray:
    if not tau > 0:
        raise ValueError("temperature must be positive")
    z = np.asarray(logits, dtype=np.float64) + noise
    return softmax((z - z.max()) / tau)


def gumbel_softmax_sample(logits, tau: float, rng: Rng) -> np.ndarray:
    logits = np.asarray(logits, dtype=np.float64)
    return tempered_softmax(logits, gumbel_noise(rng, logits.shape), tau)


def softmax_vjp(p, upstream, tau: float) -> np.ndarray:
    """Pull ``upstream = dL/dp`` back through ``p = softmax(z / tau)`` to ``dL/dz``."""
    return p * (upstream - np.dot(upstream, p)) / tau


def one_hot(index: int, n: int = N_CANDIDATES) -> np.ndarray:
    v = np.zeros(n)
    v[index] = 1.0
    return v


@dataclass
class RoutedLayer:
    W: np.ndarray
    b: np.ndarray
    logits: np.ndarray = field(default_factory=lambda: np.zeros(N_CANDIDATES))
    tau: float = 1.0
    straight_through: bool = False
    slope: float = LEAKY_SLOPE

    def __post_init__(self):
        # asarray keeps caller-owned float64 buffers; updates happen in place
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        self.logits = np.asarray(self.logits, dtype=np.float64)
        if self.W.ndim != 2 or self.b.ndim != 1 or self.logits.ndim != 1:
            raise DimensionError("W must be 2-D, b and logits 1-D")
        if self.b.shape[0] != self.W.shape[0]:
            raise DimensionError(f"bias length {self.b.shape[0]} != {self.W.shape[0]} output rows")
        if self.logits.shape != (N_CANDIDATES,):
            raise DimensionError(f"expected {N_CANDIDATES} logits, got {self.logits.shape}")
        if not self.tau > 0:
            raise ValueError("temperature must be positive")
        self._id = next(_layer_ids)
        self._version = 0

    @classmethod
    def init(cls, d_in: int, d_out: int, rng: Rng, scale: float = 0.5, **kw) -> "RoutedLayer":
        W = rng.uniform(-scale, scale, (d_out, d_in))
        b = rng.uniform(-scale, scale, d_out)
        return cls(W, b, **kw)

    @property
    def d_in(self) -> int:
        return self.W.shape[1]

    @property
    def d_out(self) -> int:
        return self.W.shape[0]

    def touch(self):
        """Mark parameters as modified; outstanding tapes become stale."""
        self._version += 1

    def step(self, dW, db, dlogits, lr: float):
        self.W -= lr * dW
        self.b -= lr * db
        self.logits -= lr * dlogits
        self.touch()


@dataclass
class RouteTape:
    x: np.ndarray
    h: np.ndarray
    noise: np.ndarray
    p_soft: np.ndarray
    p_fwd: np.ndarray
    acts: np.ndarray
    tau: float
    hard: bool
    layer_id: int
    version: int


def route_forward(layer: RoutedLayer, x, rng: Rng = None, noise=None):
    """Mixture forward pass.

    ``x`` is a single input vector or a ``(batch, d_in)`` array. Supply either
    ``rng`` (fresh Gumbel noise) or a frozen ``noise`` vector.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != layer.d_in or x.ndim > 2:
        raise DimensionError(f"input shape {x.shape} does not match d_in={layer.d_in}")
    if noise is None:
        if rng is None:
            raise ValueError("route_forward needs an rng or explicit noise")
        noise = gumbel_noise(rng, N_CANDIDATES)
    noise = np.asarray(noise, dtype=np.float64)
    h = x @ layer.W.T + layer.b
    p_soft = tempered_softmax(layer.logits, noise, layer.tau)
    if layer.straight_through:
        p_fwd = one_hot(int(np.argmax(p_soft)))
    else:
        p_fwd = p_soft
    acts = apply_all(h, layer.slope)
    y = np.tensordot(p_fwd, acts, axes=1)
    tape = RouteTape(x, h, noise, p_soft, p_fwd, acts, layer.tau, layer.straight_through,
                     layer._id, layer._version)
    return y, tape


def route_backward(layer: RoutedLayer, tape: RouteTape, dL_dy):
    """Gradients ``(dW, db, dlogits, dx)`` for a tape from ``route_forward``.

    The ``h`` path uses the forward weights; the logits path always goes
    through the soft relaxation, which is what makes straight-through work.
    """
    if tape.layer_id != layer._id or tape.version != layer._version:
        raise StaleTapeError("tape does not belong to the current state of this layer")
    g = np.asarray(dL_dy, dtype=np.float64)
    if g.shape != tape.h.shape:
        raise DimensionError(f"upstream gradient shape {g.shape} != output shape {tape.h.shape}")
    dy_dh = np.tensordot(tape.p_fwd, derivative_all(tape.h, layer.slope), axes=1)
    dh = g * dy_dh
    if tape.x.ndim == 1:
        dW = np.outer(dh, tape.x)
        db = dh.copy()
    else:
        dW = dh.T @ tape.x
        db = dh.sum(axis=0)
    dx = dh @ layer.W
    dL_dp = np.array([np.sum(g * a) for a in tape.acts])
    dlogits = softmax_vjp(tape.p_soft, dL_dp, tape.tau)
    return dW, db, dlogits, dx


def hard_select(layer_or_logits) -> Activation:
    logits = getattr(layer_or_logits, "logits", layer_or_logits)
    # np.argmax returns the first maximum: ties go to the lowest catalog index
    return CATALOG[int(np.argmax(logits))]
