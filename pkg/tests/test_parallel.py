# -*- coding: utf-8 -*-
import numpy as np

from simon32lab.mpi_utils import MPIConfig, even_counts_starts, gather_records_to_rank0, initialize_mpi, local_items
from simon32lab.pddt import PDDT_DTYPE
from simon32lab.shared_memory import SERIAL, SharedMemoryConfig, chunk_bounds, map_ordered, should_parallelize


def test_shared_memory_config():
    cfg = SharedMemoryConfig.from_dict({"workers": 3, "chunk_size": 10})
    assert cfg.enabled and cfg.auto_enabled
    assert cfg.workers == 3
    serial = SharedMemoryConfig.from_dict({"enabled": False})
    assert not should_parallelize(10_000, serial)
    assert not should_parallelize(10_000, SERIAL)


def test_chunk_bounds_and_ordered_map():
    assert chunk_bounds(10, 4) == [(0, 4), (4, 8), (8, 10)]
    assert chunk_bounds(0, 4) == []
    cfg = SharedMemoryConfig.from_dict({"enabled": True, "workers": 4, "min_items_per_worker": 1})
    assert map_ordered(lambda x: x * x, list(range(50)), cfg) == [x * x for x in range(50)]


def test_even_split_of_first_level_branches():
    counts, starts = even_counts_starts(8, 3)
    assert counts.tolist() == [3, 3, 2]
    assert starts.tolist() == [0, 3, 6]
    items = list(range(8))
    shares = [local_items(items, r, 3) for r in range(3)]
    assert sum(shares, []) == items


def test_serial_gather_and_init():
    local = np.zeros(3, dtype=PDDT_DTYPE)
    assert gather_records_to_rank0(None, local) is local
    comm, rank, size, active = initialize_mpi(MPIConfig.from_dict({"enabled": False}))
    assert (rank, size, active) == (0, 1, False)
    assert comm is None
