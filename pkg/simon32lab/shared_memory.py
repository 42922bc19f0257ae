# -*- coding: utf-8 -*-
"""Shared-memory parallel helpers (thread-based)."""

from __future__ import annotations

# Import dataclass for structured config.
from dataclasses import dataclass

# Import thread pool.
from concurrent.futures import ThreadPoolExecutor

# Import typing primitives.
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

# Import stdlib helpers.
import os

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class SharedMemoryConfig:
    """Configuration for optional shared-memory parallelism."""

    enabled: bool
    workers: int
    min_items_per_worker: int
    chunk_size: int
    auto_enabled: bool

    @classmethod
    def from_dict(cls, cfg: dict) -> "SharedMemoryConfig":
        """Build config from raw dictionary.

        If `enabled` is omitted (or set to null in JSON), threads auto-enable
        when more than one worker is available on the host.
        """
        enabled_raw = cfg.get("enabled", None)
        auto_enabled = enabled_raw is None
        raw_workers = cfg.get("workers", None)
        # Default: use hardware concurrency if available.
        workers = int(raw_workers) if raw_workers not in (None, "") else max(1, os.cpu_count() or 1)
        workers = max(1, workers)
        min_items = int(cfg.get("min_items_per_worker", 64))
        chunk_size = int(cfg.get("chunk_size", 4096))
        enabled = bool(enabled_raw) if enabled_raw is not None else workers > 1
        return cls(
            enabled=enabled,
            workers=workers,
            min_items_per_worker=max(1, min_items),
            chunk_size=max(1, chunk_size),
            auto_enabled=auto_enabled,
        )


SERIAL = SharedMemoryConfig(enabled=False, workers=1, min_items_per_worker=1, chunk_size=4096, auto_enabled=False)


def should_parallelize(n_items: int, cfg: SharedMemoryConfig | None) -> bool:
    """Return True when shared-memory parallelism should be used."""
    return (
        cfg is not None
        and cfg.enabled
        and cfg.workers > 1
        and n_items >= cfg.min_items_per_worker
    )


def chunk_bounds(n_items: int, chunk_size: int) -> List[Tuple[int, int]]:
    """Contiguous (start, end) pairs covering [0, n_items), the last one possibly short."""
    if n_items <= 0:
        return []
    step = n_items if chunk_size <= 0 else chunk_size
    return [(s, min(n_items, s + step)) for s in range(0, n_items, step)]


def map_ordered(
    fn: Callable[[T], R],
    tasks: Sequence[T],
    cfg: SharedMemoryConfig | None,
    n_items: Optional[int] = None,
) -> List[R]:
    """Apply `fn` to every task, threaded when allowed; results keep submission order.

    `n_items` is the amount of work behind the tasks (defaults to the task
    count) and is what `min_items_per_worker` is compared with.
    """
    work = len(tasks) if n_items is None else n_items
    if len(tasks) < 2 or not should_parallelize(work, cfg):
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=min(cfg.workers, len(tasks))) as pool:  # type: ignore[union-attr]
        return list(pool.map(fn, tasks))
