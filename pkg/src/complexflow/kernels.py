"""Dispatch for the hot kernels: compiled extension when built, numpy otherwise.

Set ``COMPLEXFLOW_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

import numpy as np

from . import _fallback

BACKEND = "python"
_impl = _fallback
if os.environ.get("COMPLEXFLOW_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _fallback


def twisted_convolution(W1, W2, dq, dp, hbar, sign=1, backend=None):
    impl = _select(backend)
    return impl.twisted_convolution(
        np.ascontiguousarray(W1, dtype=complex), np.ascontiguousarray(W2, dtype=complex),
        float(dq), float(dp), float(hbar), int(sign),
    )


def coherent_columns(x, q, p, alpha, norm, hbar, backend=None):
    impl = _select(backend)
    K = len(q)
    return impl.coherent_columns(
        np.ascontiguousarray(x, dtype=float), np.ascontiguousarray(q, dtype=float),
        np.ascontiguousarray(p, dtype=float),
        np.ascontiguousarray(np.broadcast_to(np.asarray(alpha, dtype=complex), (K,))),
        np.ascontiguousarray(np.broadcast_to(np.asarray(norm, dtype=float), (K,))),
        float(hbar),
    )


def set_num_threads(n: int) -> None:
    if n < 1:
        raise ValueError("thread count must be positive")
    _impl.set_num_threads(int(n))


def _select(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _fallback
    if backend == "cython":
        if BACKEND != "cython":
            raise ImportError("compiled kernels are not built")
        return _impl
    raise ValueError(f"unknown backend {backend!r}")
