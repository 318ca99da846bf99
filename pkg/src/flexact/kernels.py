"""Backend selection for the hot training loop.

The compiled Cython kernel is used when it imports; otherwise, or when the
environment variable ``FLEXACT_PURE`` is set to a non-empty value other than
``0``, the numpy implementation is used.
"""

import os

from . import _kernels_py

BACKEND = "python"
train_epoch = _kernels_py.train_epoch

if os.environ.get("FLEXACT_PURE", "") in ("", "0"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        train_epoch = _kernels.train_epoch
