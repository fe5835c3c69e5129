"""Select the compiled kernels when available, the numpy ones otherwise.

Set ``KHMGOF_PURE_PYTHON=1`` to force the numpy implementations.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("KHMGOF_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

transform_sums = _impl.transform_sums
boxcar_smooth = _impl.boxcar_smooth
path_abs_max = _impl.path_abs_max
bridge_ratio_integral = _impl.bridge_ratio_integral

__all__ = ["BACKEND", "transform_sums", "boxcar_smooth", "path_abs_max", "bridge_ratio_integral"]
