"""Backend selection for the hot numerical kernels.

The compute-heavy inner loops (band quadrature, Faddeeva sums, Volterra
convolutions) exist twice: a numba @njit version and a vectorized pure-numpy
version.  The env variable SQBATH_BACKEND picks one explicitly:

    SQBATH_BACKEND=numpy   force the pure-numpy path
    SQBATH_BACKEND=numba   require numba (ImportError if missing)

Unset, numba is used when importable.  The flag is read once at import.
"""

import os

import numpy as np

_env = os.environ.get("SQBATH_BACKEND", "").strip().lower()

try:
    import numba
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via env flag instead
    numba = None
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        """No-op stand-in so @njit-decorated defs stay importable."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


if _env in ("numpy", "python"):
    USE_NUMBA = False
elif _env in ("numba", "jit"):
    if not HAVE_NUMBA:
        raise ImportError("SQBATH_BACKEND=numba requested but numba is not importable")
    USE_NUMBA = True
elif _env == "":
    USE_NUMBA = HAVE_NUMBA
else:
    raise ValueError(f"unknown SQBATH_BACKEND value: {_env!r} (use 'numba' or 'numpy')")


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def asarray_c128(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.complex128)


def asarray_f64(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)
