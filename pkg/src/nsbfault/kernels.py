"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise, or when the
environment variable ``NSBFAULT_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy fallback is used. Both produce identical pocket
trajectories for integer-valued learning rates.
"""
import os

from . import _pykernels

_force_python = os.environ.get("NSBFAULT_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND
accuracy = _impl.accuracy
pocket_chunk = _impl.pocket_chunk
enum_max_sum = _impl.enum_max_sum
enum_decided_sum = _impl.enum_decided_sum


def available_backends():
    """Map of backend name to kernel module, for benchmarks and cross-checks."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
