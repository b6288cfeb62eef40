"""Backend selection for the inner-loop kernels.

The compiled extension is used when it was built; otherwise the NumPy
fallback is used. Setting ``DIOMHD_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"

if os.environ.get("DIOMHD_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

compensated_dot = _impl.compensated_dot
compensated_sum = _impl.compensated_sum
diophantine_scan = _impl.diophantine_scan

__all__ = ["BACKEND", "compensated_dot", "compensated_sum", "diophantine_scan"]
