import os
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "QENCBENCH_THREADS"


def default_threads():
    raw = os.environ.get(THREADS_ENV, "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


def pmap(fn, items, n_jobs=None):
    """Ordered map; threads only when ``n_jobs > 1``."""
    items = list(items)
    n_jobs = default_threads() if n_jobs is None else max(1, int(n_jobs))
    if n_jobs == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as ex:
        return list(ex.map(fn, items))
