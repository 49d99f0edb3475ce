"""Select the compiled kernel module when available, else the NumPy fallback.

Set ``EQMEASURE_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("EQMEASURE_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

hyp2f1_series = _impl.hyp2f1_series
column_recurrence = _impl.column_recurrence
miller_ratios = _impl.miller_ratios
pairwise_force = _impl.pairwise_force
