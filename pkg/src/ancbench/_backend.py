"""Select the block-kernel implementation at import time.

The compiled extension is preferred. Setting ``ANCBENCH_PURE_PYTHON=1``
forces the pure-Python kernels, which is also the automatic fallback when
the extension has not been built.
"""
import os

from . import _kernels_py

if os.environ.get("ANCBENCH_PURE_PYTHON", "").strip() not in ("", "0"):
    kernels = _kernels_py
    NAME = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]

        NAME = "cython"
    except ImportError:
        kernels = _kernels_py
        NAME = "python"

__all__ = ["kernels", "NAME"]
