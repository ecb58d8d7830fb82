"""Backend dispatch for the numeric hot kernels.

The env var KOLSIM_NUMBA picks the implementation at import time:

  KOLSIM_NUMBA=1     force the numba @njit kernels (ImportError if missing)
  KOLSIM_NUMBA=0     force the pure-numpy kernels
  unset / "auto"     numba when importable, numpy otherwise

Use get_backend() to grab a specific backend regardless of the env flag
(tests and benchmarks compare both).
"""

from __future__ import annotations

import os

_TRUTHY = {"1", "true", "on", "yes"}
_FALSY = {"0", "false", "off", "no"}


def get_backend(name):
    """Return the backend module for 'numba' or 'numpy'."""
    if name == "numba":
        from . import numba_backend
        return numba_backend
    if name == "numpy":
        from . import numpy_backend
        return numpy_backend
    raise ValueError(f"unknown accel backend {name!r}")


def _select():
    flag = os.environ.get("KOLSIM_NUMBA", "auto").strip().lower()
    if flag in _FALSY:
        return get_backend("numpy")
    if flag in _TRUTHY:
        return get_backend("numba")
    try:
        return get_backend("numba")
    except ImportError:
        return get_backend("numpy")


_impl = _select()

BACKEND = _impl.NAME
gmm_em = _impl.gmm_em
cox_ll_grad_hess = _impl.cox_ll_grad_hess
ic_reach_mean = _impl.ic_reach_mean
