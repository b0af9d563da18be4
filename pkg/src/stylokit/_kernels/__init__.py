"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the NumPy
implementation takes over transparently. STYLOKIT_KERNEL_BACKEND overrides
the choice: "python" forces the NumPy kernels, "cython" requires the
extension and raises if it is missing.
"""

import os

from stylokit._kernels import _pykernels

_requested = os.environ.get("STYLOKIT_KERNEL_BACKEND", "").strip().lower()

if _requested in ("python", "numpy"):
    _impl = _pykernels
    BACKEND = "python"
elif _requested == "cython":
    from stylokit._kernels import _ckernels as _impl

    BACKEND = "cython"
elif _requested:
    raise ValueError(
        f"unknown STYLOKIT_KERNEL_BACKEND {_requested!r}; use 'python' or 'cython'"
    )
else:
    try:
        from stylokit._kernels import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

diagonal_batch = _impl.diagonal_batch
linear_batch = _impl.linear_batch

__all__ = ["BACKEND", "diagonal_batch", "linear_batch"]
