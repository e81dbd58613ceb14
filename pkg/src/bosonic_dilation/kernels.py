"""Backend selection for the displacement kernels.

The compiled extension is used when it was built; otherwise the NumPy
implementation is used. Setting ``BOSONIC_KERNELS=python`` forces the NumPy
backend.
"""
from __future__ import annotations

import os

from . import _kernels_py

try:  # pragma: no cover - depends on the build
    from . import _kernels as _kernels_c
except ImportError:  # pragma: no cover
    _kernels_c = None

BACKENDS = {"python": _kernels_py}
if _kernels_c is not None:
    BACKENDS["cython"] = _kernels_c

_requested = os.environ.get("BOSONIC_KERNELS", "").strip().lower()
if _requested == "python" or _kernels_c is None:
    BACKEND = "python"
else:
    BACKEND = "cython"

_impl = BACKENDS[BACKEND]

displacement_matrix = _impl.displacement_matrix
accumulate_displacements = _impl.accumulate_displacements
displacement_traces = _impl.displacement_traces
