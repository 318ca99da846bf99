"""Small deterministic numeric helpers shared by the rest of the package.

Vectors and matrices are plain float64 numpy arrays. Randomness comes from
numpy's PCG64 bit generator seeded through ``SeedSequence``; PCG64 output is
specified bit-for-bit across platforms, so a recorded ``(seed, stream)`` pair
replays exactly.
"""

import math

import numpy as np

UNIFORM_EPS = 1e-10


class DimensionError(ValueError):
    pass


class OracleError(ArithmeticError):
    pass


class Rng:
    """Seeded random stream (PCG64).

    ``stream`` selects an independent substream for the same seed so that,
    for example, data generation and training noise never share draws.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        ss = np.random.SeedSequence([self.seed & 0xFFFFFFFFFFFFFFFF, self.stream])
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"Rng(seed={self.seed}, stream={self.stream})"

    def uniform_open(self, size=None):
        """Uniform draw(s) clamped to ``[eps, 1 - eps]`` so both logs stay finite."""
        u = self._gen.random(size)
        return np.clip(u, UNIFORM_EPS, 1.0 - UNIFORM_EPS)

    def uniform(self, low: float, high: float, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, size):
        """Standard normal draws via Box-Muller over ``uniform_open``."""
        n = int(np.prod(size))
        pairs = (n + 1) // 2
        u1 = self.uniform_open(pairs)
        u2 = self.uniform_open(pairs)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.empty(2 * pairs)
        z[0::2] = r * np.cos(theta)
        z[1::2] = r * np.sin(theta)
        return z[:n].reshape(size)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)


def as_vector(v) -> np.ndarray:
    return np.asarray(v, dtype=np.float64).reshape(-1)


def matvec(m, v) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    v = as_vector(v)
    if m.ndim != 2 or m.shape[1] != v.shape[0]:
        raise DimensionError(f"cannot multiply {m.shape} matrix by length-{v.shape[0]} vector")
    return m @ v


def finite_diff_grad(f, x, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of scalar ``f`` at ``x``.

    Works for any array shape; the result has the shape of ``x``.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + h
        fp = float(f(x))
        flat[k] = orig - h
        fm = float(f(x))
        flat[k] = orig
        if not (math.isfinite(fp) and math.isfinite(fm)):
            raise OracleError(f"non-finite function value probing coordinate {k}")
        gflat[k] = (fp - fm) / (2.0 * h)
    return grad
