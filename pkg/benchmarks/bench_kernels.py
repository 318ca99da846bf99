"""Time one training epoch with the compiled and the numpy kernel.

    python benchmarks/bench_kernels.py [--repeat N] [--n-train N] [--batch-size N]
"""

import argparse
import timeit

import numpy as np

from flexact import _kernels_py
from flexact.activations import Activation
from flexact.model import Network
from flexact.numkit import Rng
from flexact.routing import gumbel_noise
from flexact.synthdata import DatasetSpec, generate

try:
    from flexact import _kernels
except ImportError:
    _kernels = None


def bench(impl, X, Y, order, noise, batch_size, repeat, fixed):
    net = Network.init(4, 1, 0)
    layer = net.layer

    def once():
        impl(X, Y, layer.W, layer.b, layer.logits, order, noise, 0.5, 0.05, 0.3, 1.0, 0.01, fixed,
             False, batch_size)

    once()
    return min(timeit.repeat(once, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=20)
    p.add_argument("--n-train", type=int, default=2048)
    p.add_argument("--batch-size", type=int, default=64)
    args = p.parse_args(argv)

    data = generate(DatasetSpec(Activation.TANH, n_samples=args.n_train))
    X = np.ascontiguousarray(data.X)
    Y = data.y.reshape(-1, 1).copy()
    rng = Rng(0, stream=3)
    order = rng.permutation(len(X)).astype(np.intp)
    noise = gumbel_noise(rng, (-(-len(X) // args.batch_size), 5))

    print(f"epoch of {len(X)} samples, batch {args.batch_size}, best of {args.repeat}")
    for mode, fixed in (("routed", -1), ("fixed", int(Activation.TANH))):
        t_py = bench(_kernels_py.train_epoch, X, Y, order, noise, args.batch_size, args.repeat, fixed)
        line = f"{mode:7s} python {t_py * 1e3:8.3f} ms"
        if _kernels is not None:
            t_c = bench(_kernels.train_epoch, X, Y, order, noise, args.batch_size, args.repeat, fixed)
            line += f"   cython {t_c * 1e3:8.3f} ms   speedup {t_py / t_c:6.1f}x"
        else:
            line += "   cython (not built)"
        print(line)


if __name__ == "__main__":
    main()
