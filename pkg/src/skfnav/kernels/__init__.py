"""Hot numeric kernels: compiled backend when available, numpy fallback.

Set ``SKFNAV_PURE=1`` to force the numpy backend (useful for benchmarking and
debugging).  ``BACKEND`` reports which implementation is active.
"""

import os

from . import _numpy as numpy_backend

if os.environ.get("SKFNAV_PURE"):
    _impl = numpy_backend
    BACKEND = "numpy"
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]

        BACKEND = "native"
    except ImportError:
        _impl = numpy_backend
        BACKEND = "numpy"

strapdown_batch = _impl.strapdown_batch
wrap_angle = numpy_backend.wrap_angle
attitude_batch = numpy_backend.attitude_batch

__all__ = ["BACKEND", "strapdown_batch", "wrap_angle", "attitude_batch", "numpy_backend"]
