"""JIT shim: numba-compiled kernels with a pure-numpy escape hatch.

Set HODGELAB_NO_NUMBA=1 to force the pure-numpy/python fallback path
(useful for debugging and for the kernel benchmark).  Fallback and jitted
kernels agree to ~1e-12; summation order inside a kernel is fixed either
way so repeated runs are bit-identical.
"""

import functools
import os

NUMBA_DISABLED = os.environ.get("HODGELAB_NO_NUMBA", "").strip() not in ("", "0")

try:
    if NUMBA_DISABLED:
        raise ImportError("numba disabled via HODGELAB_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
    njit = functools.partial(njit, cache=True)
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap
