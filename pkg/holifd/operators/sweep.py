from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from holifd.operators.base import BaseOperator
from holifd.utils.config import get_threads
from holifd.utils.helpers import chunkify

T = TypeVar("T")
R = TypeVar("R")


class SweepOperator(BaseOperator):
    """
    Run independent sweep entries, optionally on a thread pool capped by HOLIFD_THREADS.
    Results always come back in the order of the entries.
    :param fn: work for one entry
    :param items: sweep entries
    :param threads: pool size; defaults to HOLIFD_THREADS
    :param chunk_size: entries submitted per batch; defaults to the pool size
    """

    def __init__(
        self,
        fn: Optional[Callable[[T], R]] = None,
        items: Iterable[T] = (),
        threads: Optional[int] = None,
        chunk_size: Optional[int] = None,
    ):
        super(SweepOperator, self).__init__()
        self.fn = fn
        self.items = list(items)
        self.threads = threads or get_threads()
        self.chunk_size = chunk_size or self.threads

    def execute(self) -> List[R]:
        return self.map(self.fn, self.items)

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        items = list(items)
        if self.threads == 1:
            self.log.info(f"Running {len(items)} sweep entries sequentially")
            return [fn(item) for item in items]
        results: List[R] = []
        completed = 0
        self.log.info(f"Running {len(items)} sweep entries on {self.threads} threads")
        with ThreadPoolExecutor(max_workers=self.threads) as pool:
            for chunk in chunkify(items, self.chunk_size):
                results.extend(pool.map(fn, chunk))
                completed += len(chunk)
                self.log.info(f"SWEEP_ENTRIES_COMPLETED : {completed}")
        return results
