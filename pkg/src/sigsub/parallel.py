"""Process-pool map with deterministic, order-preserving results."""
import os
from concurrent.futures import ProcessPoolExecutor

JOBS_ENV = "SIGSUB_JOBS"


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def map_jobs(fn, items, jobs=None):
    """``[fn(x) for x in items]``, optionally spread over ``jobs`` processes.

    Results come back in input order, so output never depends on ``jobs``.
    """
    items = list(items)
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
