"""Single routed layer network, MSE objective and the training loop."""

import math
from dataclasses import dataclass, field

import numpy as np

from .activations import LEAKY_SLOPE, Activation, apply, derivative
from .numkit import DimensionError, Rng
from .regularizer import gradient_norms, kl_divergence, kl_grad_wrt_logits, pseudo_probs, total_loss
from .routing import RoutedLayer, gumbel_noise, hard_select, route_backward, route_forward
from .synthdata import Dataset

DIVERGENCE_LIMIT = 1e6


class DivergenceError(RuntimeError):
    def __init__(self, epoch: int, loss: float):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss!r})")
        self.epoch = epoch
        self.loss = loss


@dataclass(frozen=True)
class TrainConfig:
    # tuned on the synthetic grid; the 1/tau pull-back needs a hot start and a cold finish
    epochs: int = 600
    batch_size: int = 64
    learning_rate: float = 0.5
    alpha: float = 0.3
    lam: float = 0.3
    tau_start: float = 5.0
    tau_end: float = 0.01
    straight_through: bool = False
    seed: int = 0
    slope: float = LEAKY_SLOPE

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be positive")
        if not 0 < self.tau_end <= self.tau_start:
            raise ValueError("need 0 < tau_end <= tau_start")
        if not self.alpha >= 0:
            raise ValueError("alpha must be non-negative")
        if not self.lam > 0:
            raise ValueError("lambda must be positive")


@dataclass
class Network:
    layer: RoutedLayer
    fixed: Activation = None

    @property
    def routed(self) -> bool:
        return self.fixed is None

    @classmethod
    def init(cls, d_in: int, d_out: int, seed: int, fixed: Activation = None, **layer_kw) -> "Network":
        return cls(RoutedLayer.init(d_in, d_out, Rng(seed, stream=1), **layer_kw), fixed)

    def selected(self) -> Activation:
        return hard_select(self.layer) if self.routed else self.fixed

    def predict(self, X) -> np.ndarray:
        """Deterministic prediction: routed networks commit to their argmax candidate."""
        X = np.asarray(X, dtype=np.float64)
        h = X @ self.layer.W.T + self.layer.b
        return apply(self.selected(), h, self.layer.slope)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    task: float
    kl: float
    total: float
    tau: float
    probs: tuple


@dataclass
class TrainTrace:
    alpha: float
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def probs(self) -> np.ndarray:
        return np.array([r.probs for r in self.records])

    def final(self) -> EpochRecord:
        return self.records[-1]


def mse_loss(pred, target):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape or pred.size == 0:
        raise DimensionError(f"prediction shape {pred.shape} vs target shape {target.shape}")
    diff = pred - target
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


def anneal_tau(epoch: int, cfg: TrainConfig) -> float:
    if not 0 <= epoch < cfg.epochs:
        raise ValueError(f"epoch {epoch} outside [0, {cfg.epochs})")
    if cfg.epochs == 1:
        return cfg.tau_start
    return cfg.tau_start * (cfg.tau_end / cfg.tau_start) ** (epoch / (cfg.epochs - 1))


def batch_gradients(net: Network, X, Y, noise=None, alpha: float = 0.0, lam: float = 1.0):
    """Loss breakdown and ``(dW, db, dlogits)`` for one batch.

    ``Y`` has shape ``(batch, d_out)``. Routed networks need the frozen Gumbel
    ``noise`` for the pass; the KL target is computed from the same batch and
    held constant. Also returns the soft probabilities used (``None`` for
    fixed networks).
    """
    layer = net.layer
    if not net.routed:
        h = X @ layer.W.T + layer.b
        task, dy = mse_loss(apply(net.fixed, h, layer.slope), Y)
        dh = dy * derivative(net.fixed, h, layer.slope)
        return total_loss(task, 0.0, alpha), (dh.T @ X, dh.sum(axis=0), np.zeros_like(layer.logits)), None
    y, tape = route_forward(layer, X, noise=noise)
    task, dy = mse_loss(y, Y)
    dW, db, dlogits, _ = route_backward(layer, tape, dy)
    _, mean_norms = gradient_norms(tape.h, layer.slope)
    target = pseudo_probs(mean_norms, lam)
    kl = kl_divergence(target, tape.p_soft)
    if alpha > 0:
        dlogits = dlogits + alpha * kl_grad_wrt_logits(target, tape.p_soft, tape.tau)
    return total_loss(task, kl, alpha), (dW, db, dlogits), tape.p_soft


def train(net: Network, data: Dataset, cfg: TrainConfig) -> TrainTrace:
    from .kernels import train_epoch

    X = np.ascontiguousarray(data.X, dtype=np.float64)
    Y = np.ascontiguousarray(np.asarray(data.y, dtype=np.float64).reshape(len(data), -1))
    if len(data) == 0:
        raise ValueError("empty training set")
    if X.shape[1] != net.layer.d_in or Y.shape[1] != net.layer.d_out:
        raise DimensionError("dataset shape does not match network")
    layer = net.layer
    layer.straight_through = cfg.straight_through
    layer.slope = cfg.slope
    rng = Rng(cfg.seed, stream=3)
    n = X.shape[0]
    n_batches = math.ceil(n / cfg.batch_size)
    fixed = -1 if net.routed else int(net.fixed)
    trace = TrainTrace(cfg.alpha)
    for epoch in range(cfg.epochs):
        tau = anneal_tau(epoch, cfg)
        layer.tau = tau
        order = rng.permutation(n).astype(np.intp)
        if net.routed:
            noise = gumbel_noise(rng, (n_batches, 5))
        else:
            noise = np.zeros((n_batches, 5))
        task, kl, probs = train_epoch(
            X, Y, layer.W, layer.b, layer.logits, order, noise, tau, cfg.learning_rate,
            cfg.alpha, cfg.lam, cfg.slope, fixed, cfg.straight_through, cfg.batch_size,
        )
        layer.touch()
        total = task + cfg.alpha * kl
        if not math.isfinite(total) or abs(total) > DIVERGENCE_LIMIT:
            raise DivergenceError(epoch, total)
        if not net.routed:
            probs = np.eye(5)[net.fixed]
        trace.records.append(EpochRecord(epoch, task, kl, total, tau, tuple(float(p) for p in probs)))
    return trace


def evaluate(net: Network, data: Dataset) -> float:
    pred = net.predict(data.X)
    return mse_loss(pred.reshape(len(data), -1), np.asarray(data.y).reshape(len(data), -1))[0]
