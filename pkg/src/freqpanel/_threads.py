"""BLAS thread control.

The linear algebra in this package runs on matrices of order 50-500, where
OpenBLAS oversubscription is pure overhead (an order of magnitude on small
machines). Replication-level parallelism is handled explicitly via the
``threads`` arguments, so BLAS is pinned to one thread for CLI runs.
"""
from __future__ import annotations

import os


def limit_blas_threads(n: int = 1) -> None:
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=n)
    except ImportError:  # fall back to env vars for not-yet-loaded libraries
        for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(n))
