import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

_THREADS_ENV = "SPINNER_LATTICE_THREADS"

T = TypeVar("T")
R = TypeVar("R")


def thread_count(threads: Optional[int] = None) -> int:
    """
    Worker count for parallel sweeps.

    An explicit value wins; otherwise ``SPINNER_LATTICE_THREADS`` is read, defaulting to 1.

    Raises:
        ValueError: If the resolved count is not a positive integer.
    """
    if threads is None:
        raw = os.environ.get(_THREADS_ENV, "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"{_THREADS_ENV} must be an integer. Received: {raw}")
    if threads < 1:
        raise ValueError(f"Thread count must be positive. Received: {threads}")
    return threads


def parallel_map(
    fn: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None
) -> List[R]:
    """Maps fn over items, returning results in input order whatever the worker count."""
    items = list(items)
    workers = thread_count(threads)
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    logging.debug(f"Mapping {len(items)} items over {workers} threads")
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
