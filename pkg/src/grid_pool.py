"""
Пул потоков для расчёта спектра по сетке частот.

Собственные задачи в разных точках сетки независимы; сопоставление ветвей
идёт потом последовательно. Размер пула ограничен MCGL_THREADS; при 1 всё
считается в вызывающем потоке. Порядок результатов совпадает с порядком входа.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import config

LOG = logging.getLogger("mcgl.pool")

T = TypeVar("T")
R = TypeVar("R")

_pool: Optional[ThreadPoolExecutor] = None
_pool_size = 0


def get_pool() -> ThreadPoolExecutor:
    """Ленивая инициализация; при смене config.THREADS пул пересоздаётся."""
    global _pool, _pool_size
    if _pool is not None and _pool_size != config.THREADS:
        shutdown_pool()
    if _pool is None:
        _pool = ThreadPoolExecutor(max_workers=config.THREADS, thread_name_prefix="mcgl-grid")
        _pool_size = config.THREADS
        LOG.debug("Пул сетки: %d потоков", config.THREADS)
    return _pool


def grid_map(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """map по сетке; исключение из любой точки пробрасывается вызывающему."""
    items = list(items)
    if config.THREADS <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    return list(get_pool().map(fn, items))


def shutdown_pool(wait: bool = True) -> None:
    """Остановить пул (в конце команды CLI)."""
    global _pool, _pool_size
    if _pool is None:
        return
    try:
        _pool.shutdown(wait=wait)
    finally:
        _pool = None
        _pool_size = 0


__all__ = ["get_pool", "grid_map", "shutdown_pool"]
