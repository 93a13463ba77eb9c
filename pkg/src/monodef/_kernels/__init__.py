"""Order kernels: compiled extension when built, pure Python otherwise.

Set ``MONODEF_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("MONODEF_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend  # type: ignore[no-redef]
    except ImportError:
        compiled_backend = None

backend = compiled_backend or python_backend
BACKEND = backend.BACKEND

closure = backend.closure
transpose = backend.transpose
order_violation = backend.order_violation
mub_table = backend.mub_table
mub_bits = python_backend.mub_bits  # single query: call overhead beats packing
iter_bits = python_backend.iter_bits

__all__ = [
    "BACKEND",
    "closure",
    "compiled_backend",
    "iter_bits",
    "mub_bits",
    "mub_table",
    "order_violation",
    "python_backend",
    "transpose",
]
