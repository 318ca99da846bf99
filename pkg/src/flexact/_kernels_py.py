"""Reference epoch kernel built from the public numpy operations.

Mirrors ``_kernels.pyx`` exactly in what it computes; used when the compiled
extension is unavailable or ``FLEXACT_PURE=1`` is set.
"""

import numpy as np

from .activations import CATALOG
from .routing import RoutedLayer


def train_epoch(X, Y, W, b, logits, order, noise, tau, lr, alpha, lam, slope, fixed,
                straight_through, batch_size):
    """One pass over ``X`` in ``order``; updates ``W``, ``b``, ``logits`` in place.

    Returns the batch-mean task loss, batch-mean KL and batch-mean soft
    probabilities.
    """
    from .model import Network, batch_gradients

    layer = RoutedLayer(W, b, logits, tau=tau, straight_through=straight_through, slope=slope)
    net = Network(layer, None if fixed < 0 else CATALOG[fixed])
    n = X.shape[0]
    task_sum = kl_sum = 0.0
    p_sum = np.zeros(5)
    n_batches = 0
    for i, start in enumerate(range(0, n, batch_size)):
        rows = order[start:start + batch_size]
        loss, (dW, db, dlogits), p_soft = batch_gradients(net, X[rows], Y[rows], noise[i], alpha, lam)
        layer.step(dW, db, dlogits, lr)
        task_sum += loss.task
        kl_sum += loss.kl
        if p_soft is not None:
            p_sum += p_soft
        n_batches += 1
    return task_sum / n_batches, kl_sum / n_batches, p_sum / n_batches
