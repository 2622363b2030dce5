"""Process-wide cap on worker threads (``PLS_THREADS`` or ``--threads``)."""
from __future__ import annotations

import os

import numba

# Skip the TBB layer: old system TBB builds make numba warn on every process.
numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_threads: int | None = None


def get_threads() -> int:
    if _threads is not None:
        return _threads
    env = os.environ.get("PLS_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def set_threads(n: int | None) -> None:
    global _threads
    _threads = None if n is None else max(1, int(n))
    numba.set_num_threads(min(get_threads(), numba.config.NUMBA_NUM_THREADS))
