"""Ordered work pool that isolates per-task failures."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable, Iterable


def _guarded(func: Callable, item):
    try:
        return True, func(item)
    except Exception as exc:  # noqa: BLE001 - reported per task
        return False, f"{type(exc).__name__}: {exc}"


def parallel_map(func: Callable, items: Iterable, n_jobs: int = 1) -> list[tuple[bool, object]]:
    """Apply ``func`` to every item, returning ``(ok, value_or_message)`` in input order.

    ``n_jobs > 1`` uses a process pool; ``func`` and items must then be picklable.
    """
    items = list(items)
    if n_jobs < 1:
        raise ValueError("n_jobs must be at least 1")
    task = partial(_guarded, func)
    if n_jobs == 1 or len(items) <= 1:
        return [task(it) for it in items]
    chunk = max(1, len(items) // (4 * n_jobs))
    with ProcessPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(task, items, chunksize=chunk))
