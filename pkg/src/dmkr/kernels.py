"""Kernel backend selection: compiled extension if available, numpy fallback.

The two backends implement identical arithmetic; `BACKEND` records which one
is active so run metadata can pin it.  Set DMKR_FORCE_PYTHON_KERNELS=1 to
force the fallback (used by the benchmark and backend-equivalence tests).
"""

import os

from . import _kernels_py

if os.environ.get("DMKR_FORCE_PYTHON_KERNELS"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND
HAVE_COMPILED: bool = BACKEND == "compiled"

iterate_batch = _impl.iterate_batch
trajectory_record = _impl.trajectory_record
lyapunov_max_batch = _impl.lyapunov_max_batch
lyapunov_spectrum_batch = _impl.lyapunov_spectrum_batch
bifurcation_record_batch = _impl.bifurcation_record_batch

python_backend = _kernels_py
