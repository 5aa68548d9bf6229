"""Chunked, order-preserving evaluation over integer ranges"""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

from tqdm import tqdm

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_CHUNK = 50_000


def chunk_ranges(
    start: int, stop: int, chunk: int = DEFAULT_CHUNK
) -> List[Tuple[int, int]]:
    """Split [start, stop) into consecutive half-open chunks"""
    return [(lo, min(lo + chunk, stop)) for lo in range(start, stop, chunk)]


def ordered_map(
    fn: Callable[[T], R], items: Sequence[T], workers: int = 1
) -> List[R]:
    """Apply fn to every item, returning results in item order

    Results are merged in submission order whatever the completion order,
    so reductions over them do not depend on the worker count. fn and the
    items must be picklable when workers > 1.

    Args:
        fn: The function to apply
        items: The work items, typically chunks of a range
        workers: Number of worker processes; 1 evaluates in-process
    """
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logging.debug(f"Mapping {len(items)} chunks over {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(fn, item) for item in items]
        return [future.result() for future in futures]


def progress(
    iterable: Iterable[T], desc: str, total: Optional[int] = None
) -> Iterable[T]:
    """Wrap a long loop in a progress bar shown at info verbosity"""
    return tqdm(
        iterable,
        desc=desc,
        total=total,
        disable=not logging.getLogger().isEnabledFor(logging.INFO),
    )
