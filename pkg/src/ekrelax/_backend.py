"""Select the kernel implementation at import time.

The compiled extension is used when it was built; otherwise the NumPy
fallback is loaded. Setting ``EKRELAX_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _kernels_py


def _load() -> ModuleType:
    if os.environ.get("EKRELAX_PURE_PYTHON", "").strip() not in ("", "0"):
        return _kernels_py
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return _kernels_py
    return _kernels


kernels = _load()
BACKEND: str = kernels.BACKEND


def compiled_kernels() -> ModuleType | None:
    """Return the compiled module if it exists, regardless of the override."""
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels
