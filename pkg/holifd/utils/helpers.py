from itertools import islice
from typing import Iterable, Iterator, List, TypeVar

T = TypeVar("T")


def chunkify(items: Iterable[T], chunk_size: int) -> Iterator[List[T]]:
    """Consecutive batches of at most ``chunk_size`` sweep entries, in order"""
    if chunk_size <= 0:
        raise ValueError(f"Chunk size must be a positive integer, got {chunk_size}")
    it = iter(items)
    while True:
        batch = list(islice(it, chunk_size))
        if not batch:
            return
        yield batch
