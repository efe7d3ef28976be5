"""Hot kernels with a numba path and a pure-numpy fallback.

Set ``EQUIDIST_DISABLE_NUMBA=1`` to force the numpy path. Both backends
expose ``reduce_bases``, ``tropical_min`` and ``power_sums`` with the same
signatures and flag codes.
"""

import os

from . import _vector

OK = _vector.OK
NOT_ADMISSIBLE = _vector.NOT_ADMISSIBLE
REGION_TOO_LARGE = _vector.REGION_TOO_LARGE
DEGENERATE = _vector.DEGENERATE
BOUNDARY_TOL = _vector.BOUNDARY_TOL


def _numba_disabled() -> bool:
    return os.environ.get("EQUIDIST_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")


try:
    if _numba_disabled():
        raise ImportError("numba disabled by EQUIDIST_DISABLE_NUMBA")
    from . import _jit as _backend

    BACKEND = "numba"
except ImportError:
    _backend = _vector
    BACKEND = "numpy"

reduce_bases = _backend.reduce_bases
tropical_min = _backend.tropical_min
power_sums = _backend.power_sums


def get_backend(name: str):
    """Return the kernel module for ``"numba"`` or ``"numpy"``."""
    if name == "numpy":
        return _vector
    if name == "numba":
        from . import _jit

        return _jit
    raise ValueError(f"unknown backend {name!r}")
