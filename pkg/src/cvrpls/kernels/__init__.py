"""Kernel backend selection.

By default the functions in .dp are compiled with numba.njit. Setting the
environment variable CVRPLS_NO_NUMBA=1 (or numba failing to import) selects
the plain interpreted versions instead; those run the identical bodies, with
numpy overflow warnings for the deliberate uint64 hash wraparound silenced.

BACKEND reports which path is active ("numba" or "python").
"""

import functools
import os

import numpy as np

from . import dp

_FORCE_PYTHON = os.environ.get("CVRPLS_NO_NUMBA", "").strip() not in ("", "0")

if not _FORCE_PYTHON:
    try:
        from numba import njit
    except ImportError:
        _FORCE_PYTHON = True

_PY_FUNCS = {}
_NB_FUNCS = {}


def _python_backend(fn):
    @functools.wraps(fn)
    def wrapper(*args):
        with np.errstate(over="ignore"):
            return fn(*args)

    return wrapper


for _name in ("build_subseq_tables", "held_karp", "bs_dp_windowed",
              "bs_dp_full", "bs_layer_counts"):
    _fn = getattr(dp, _name)
    _PY_FUNCS[_name] = _python_backend(_fn)
    if not _FORCE_PYTHON:
        _NB_FUNCS[_name] = njit(cache=True)(_fn)

BACKEND = "python" if _FORCE_PYTHON else "numba"
_ACTIVE = _PY_FUNCS if _FORCE_PYTHON else _NB_FUNCS

build_subseq_tables = _ACTIVE["build_subseq_tables"]
held_karp = _ACTIVE["held_karp"]
bs_dp_windowed = _ACTIVE["bs_dp_windowed"]
bs_dp_full = _ACTIVE["bs_dp_full"]
bs_layer_counts = _ACTIVE["bs_layer_counts"]

python_kernels = _PY_FUNCS
