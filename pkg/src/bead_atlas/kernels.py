"""Backend selection: compiled extension when importable, numpy fallback otherwise.

Set BEAD_ATLAS_PURE_PYTHON=1 to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("BEAD_ATLAS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

project_sweep = _impl.project_sweep
hook_walk = _impl.hook_walk
