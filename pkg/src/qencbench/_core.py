"""Select the kernel backend at import time.

The compiled extension is preferred; setting ``QENCBENCH_PURE=1`` forces the
pure-Python fallback (useful for benchmarking and for platforms without a
compiler).
"""

import os

from . import _pykernels

if os.environ.get("QENCBENCH_PURE", "").strip() not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "python" if _impl is _pykernels else "cython"

phase_diagonal = _impl.phase_diagonal
anneal = _impl.anneal
smo = _impl.smo

__all__ = ["BACKEND", "phase_diagonal", "anneal", "smo"]
