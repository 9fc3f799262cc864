"""Backend dispatch for the hot numeric kernels.

Two interchangeable implementations exist:

* ``numba_impl`` — loop-style kernels compiled with ``@njit`` (default).
* ``numpy_impl`` — vectorized pure-numpy fallback.

Selection is controlled by the ``ASE_NUMBA`` environment variable at import
time: ``0``/``false``/``off`` forces the numpy fallback, ``1``/``true``/``on``
requires numba (import error if unavailable), anything else picks numba when
importable and falls back to numpy otherwise.

Both backends implement the same contract and produce identical model
behaviour for the same inputs: per-node randomness is keyed by hashed node
ids rather than by a sequential stream, so tree structure does not depend on
traversal order, and all floating-point expressions are mirrored between the
implementations. ``benchmarks/bench_kernels.py`` times one against the other.
"""

from __future__ import annotations

import os

_FALSY = {"0", "false", "off", "no"}
_TRUTHY = {"1", "true", "on", "yes"}


def _select():
    flag = os.environ.get("ASE_NUMBA", "auto").strip().lower()
    if flag in _FALSY:
        from . import numpy_impl

        return numpy_impl
    if flag in _TRUTHY:
        from . import numba_impl

        return numba_impl
    try:
        from . import numba_impl

        return numba_impl
    except ImportError:
        from . import numpy_impl

        return numpy_impl


_impl = _select()

BACKEND = _impl.BACKEND
build_iforest = _impl.build_iforest
iforest_depth_sum = _impl.iforest_depth_sum
cart_build = _impl.cart_build
cart_apply = _impl.cart_apply
kth_neighbor_distances = _impl.kth_neighbor_distances

__all__ = [
    "BACKEND",
    "build_iforest",
    "iforest_depth_sum",
    "cart_build",
    "cart_apply",
    "kth_neighbor_distances",
]
