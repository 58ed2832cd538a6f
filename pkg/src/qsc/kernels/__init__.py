"""Kernel backend selection.

Set ``QSC_KERNELS=numpy`` or ``QSC_KERNELS=numba`` to pick the amplitude
kernels; the default is numba when importable, else the pure-numpy path.
Both backends implement the same four hot operations used by the state
engine: ``apply_1q``, ``apply_kq``, ``prob_one``, ``collapse_remove``.
"""
from __future__ import annotations

import os

from . import numpy_impl


def _select():
    choice = os.environ.get("QSC_KERNELS", "").strip().lower()
    if choice == "numpy":
        return numpy_impl
    try:
        from . import numba_impl
    except ImportError:
        if choice == "numba":
            raise ImportError("QSC_KERNELS=numba requested but numba is not installed")
        return numpy_impl
    return numba_impl


backend = _select()

apply_1q = backend.apply_1q
apply_kq = backend.apply_kq
prob_one = backend.prob_one
collapse_remove = backend.collapse_remove
BACKEND_NAME = backend.NAME

__all__ = [
    "apply_1q",
    "apply_kq",
    "prob_one",
    "collapse_remove",
    "BACKEND_NAME",
    "backend",
]
