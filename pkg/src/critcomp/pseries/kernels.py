"""Backend selection for the integer polynomial kernels.

The compiled extension is used when it imports; otherwise the pure-Python
module provides the same functions. Setting ``CRITCOMP_PURE_PYTHON=1`` in the
environment forces the fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("CRITCOMP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

mullow = _impl.mullow
BACKEND: str = _impl.BACKEND

__all__ = ["mullow", "BACKEND"]
