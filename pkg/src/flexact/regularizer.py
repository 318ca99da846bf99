"""Gradient-norm pseudo-labels and the KL penalty on routing probabilities.

Unbounded candidates (ReLU, LeakyReLU, Identity) have large derivatives and
tend to win the routing competition for reasons unrelated to fit quality. The
pseudo-labels favour candidates with small average derivative norm, and the KL
term pulls the router towards them. Pseudo-labels are a constant target: no
gradient flows back through them.
"""

from dataclasses import dataclass

import numpy as np

from .activations import LEAKY_SLOPE, derivative_all
from .routing import softmax, softmax_vjp

PROB_FLOOR = 1e-12


@dataclass(frozen=True)
class RegularizerConfig:
    lam: float = 1.0
    alpha: float = 0.3

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if not self.alpha >= 0:
            raise ValueError("alpha must be non-negative")


@dataclass(frozen=True)
class LossBreakdown:
    task: float
    kl: float
    total: float
    alpha: float


def gradient_norms(h_batch, slope: float = LEAKY_SLOPE):
    """Per-candidate derivative norms.

    Returns ``(per_sample, mean)`` where ``per_sample[i, n]`` is the L2 norm
    over output units of candidate ``i``'s derivative at sample ``n`` and
    ``mean`` averages that over the batch.
    """
    h = np.asarray(h_batch, dtype=np.float64)
    if h.ndim == 1:
        h = h[:, None]
    if h.shape[0] == 0:
        raise ValueError("empty batch")
    d = derivative_all(h, slope)
    per_sample = np.sqrt(np.sum(d * d, axis=2))
    return per_sample, per_sample.mean(axis=1)


def pseudo_probs(mean_norms, lam: float = 1.0) -> np.ndarray:
    if not lam > 0:
        raise ValueError("lambda must be positive")
    return softmax(-np.asarray(mean_norms, dtype=np.float64) / lam)


def kl_divergence(target, model) -> float:
    target = np.asarray(target, dtype=np.float64)
    model = np.maximum(np.asarray(model, dtype=np.float64), PROB_FLOOR)
    nz = target > 0
    return float(np.sum(target[nz] * (np.log(target[nz]) - np.log(model[nz]))))


def kl_grad_wrt_logits(target, p_soft, tau: float) -> np.ndarray:
    """d KL(target || p_soft) / d logits through the tempered softmax."""
    target = np.asarray(target, dtype=np.float64)
    p = np.asarray(p_soft, dtype=np.float64)
    # derivative of the floor is zero below it
    live = p > PROB_FLOOR
    dL_dp = np.where(live, -target / np.where(live, p, 1.0), 0.0)
    return softmax_vjp(p, dL_dp, tau)


def total_loss(task: float, kl: float, alpha: float) -> LossBreakdown:
    if task < 0 or kl < 0 or alpha < 0:
        raise ValueError("loss terms and alpha must be non-negative")
    return LossBreakdown(task, kl, task + alpha * kl, alpha)
