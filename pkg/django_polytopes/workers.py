"""Deterministic sharding of Monte-Carlo work across threads."""

from concurrent.futures import ThreadPoolExecutor

from django_polytopes.conf import lab_setting
from django_polytopes.sphere import RngStream, as_generator

SHARD_SIZE = 100_000


def map_ordered(task, items, threads=None):
    """``map`` over a thread pool; results always come back in input order."""
    threads = threads or lab_setting("THREADS")
    if threads <= 1 or len(items) <= 1:
        return [task(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(task, items))


def run_sharded(rng, total, work, threads=None, shard_size=SHARD_SIZE):
    """
    Run ``work(generator, size)`` over fixed-size shards of ``total`` draws.

    Shard i draws from ``rng.child(i)``, so the concatenated results depend only on the
    stream and ``shard_size``, never on the number of threads. A bare numpy Generator is
    consumed sequentially in a single thread.
    """
    sizes = [min(shard_size, total - start) for start in range(0, total, shard_size)]
    if not isinstance(rng, RngStream):
        gen = as_generator(rng)
        return [work(gen, size) for size in sizes]

    def task(item):
        index, size = item
        return work(rng.child(index).generator(), size)

    return map_ordered(task, list(enumerate(sizes)), threads)
