"""Backend selection for the compiled kernels.

``RDREAM_BACKEND=numpy`` forces the pure-numpy code path; the default is
numba when it can be imported. ``set_backend`` switches at runtime (tests and
the benchmark use it to compare both paths).
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def _initial_backend():
    requested = os.environ.get("RDREAM_BACKEND", "").strip().lower()
    if requested == "numpy" or not HAVE_NUMBA:
        return "numpy"
    if requested not in ("", "numba"):
        raise ValueError(f"RDREAM_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    return "numba"


_backend = _initial_backend()


def backend():
    return _backend


def set_backend(name):
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


def njit(*args, **kwargs):
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)

    def wrap(f):
        return f

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return wrap
