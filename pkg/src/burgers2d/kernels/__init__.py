"""Backend dispatch for the hot kernels.

The environment variable ``BURG2D_KERNELS`` selects the implementation:
``numba`` (jitted, the default when numba imports), ``numpy`` (pure
vectorized fallback), or ``auto``.  Both backends produce bit-identical
fields; ``benchmarks/bench_kernels.py`` compares their throughput.
"""

import os
import warnings

from . import _numpy

_requested = os.environ.get("BURG2D_KERNELS", "auto").strip().lower()
if _requested not in ("auto", "numba", "numpy"):
    raise ValueError(f"BURG2D_KERNELS must be auto|numba|numpy, got {_requested!r}")

if _requested == "numpy":
    _impl = _numpy
    BACKEND = "numpy"
else:
    try:
        from . import _numba as _impl

        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        warnings.warn("numba unavailable, falling back to numpy kernels", RuntimeWarning)
        _impl = _numpy
        BACKEND = "numpy"

step_interior = _impl.step_interior
entropy_interior = _impl.entropy_interior


def get_backend(name: str):
    """Return the kernel module for ``name`` ("numpy" or "numba")."""
    if name == "numpy":
        return _numpy
    if name == "numba":
        from . import _numba

        return _numba
    raise ValueError(f"unknown kernel backend {name!r}")
