"""Backend selection for the hot kernels.

The compiled extension ``_ckernels`` is used when it was built; otherwise the
numpy implementation in ``_pykernels`` is loaded. Setting the environment
variable ``PVSTAB_PURE_PYTHON=1`` forces the fallback.
"""
from __future__ import annotations

import os

from pvstab import _pykernels

if os.environ.get("PVSTAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from pvstab import _ckernels as _impl
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"
    else:
        BACKEND = "cython"

sigma_scalar = _impl.sigma_scalar
delta_scalar = _impl.delta_scalar
sigma_array = _impl.sigma_array
delta_array = _impl.delta_array

__all__ = ["BACKEND", "sigma_scalar", "delta_scalar", "sigma_array", "delta_array"]
