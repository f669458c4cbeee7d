"""Deterministic, optionally threaded evaluation of a model over input rows."""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import NumericalError

_ENV_VAR = "UQ_THREADS"
_MIN_PARALLEL_ROWS = 64


def thread_cap() -> int:
    """Model-evaluation parallelism cap: UQ_THREADS or the hardware count."""
    raw = os.environ.get(_ENV_VAR)
    if raw is None:
        return os.cpu_count() or 1
    try:
        cap = int(raw)
    except ValueError as exc:
        raise NumericalError(f"{_ENV_VAR} must be an integer, got {raw!r}") from exc
    return max(1, cap)


def _check_row(value, i, rows, what) -> np.ndarray:
    out = np.atleast_1d(np.asarray(value, dtype=float))
    if out.ndim != 1:
        raise NumericalError(f"model must return a vector, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise NumericalError(
            f"model returned non-finite output at {what} {i}: {rows[i].tolist()}"
        )
    return out


def evaluate_rows(model, rows: np.ndarray, threads: int | None = None,
                  what: str = "row") -> np.ndarray:
    """Evaluate model on each row of `rows`, assembling results by row index.

    Rows may be evaluated concurrently (the model must be pure); results are
    stored at their index so the output is identical for any thread count.
    Model failures and non-finite outputs raise NumericalError naming the row.
    """
    n = rows.shape[0]
    if threads is None:
        threads = thread_cap()
    threads = min(threads, n)

    def eval_one(i):
        try:
            value = model(rows[i])
        except Exception as exc:
            raise NumericalError(f"model failed at {what} {i}: {rows[i].tolist()}: {exc}") from exc
        return _check_row(value, i, rows, what)

    if threads <= 1 or n < _MIN_PARALLEL_ROWS:
        results = [eval_one(i) for i in range(n)]
    else:
        chunks = np.array_split(np.arange(n), threads * 4)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunk_results = pool.map(lambda idx: [eval_one(i) for i in idx], chunks)
            results = [row for chunk in chunk_results for row in chunk]
    width = len(results[0])
    for i, row in enumerate(results):
        if len(row) != width:
            raise NumericalError(f"model output size changed at {what} {i}")
    return np.asarray(results)
