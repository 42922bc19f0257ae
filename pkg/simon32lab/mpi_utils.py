# -*- coding: utf-8 -*-
"""MPI utilities for simon32lab.

This module provides:
- MPI initialization (optional)
- an even split of independent work items across ranks
- a gather of numpy record arrays to rank 0
"""

# Import typing primitives.
from typing import Any, List, Optional, Sequence, Tuple

# Import dataclass for structured configs.
from dataclasses import dataclass

# Import sys for early exits on non-root ranks when MPI is disabled explicitly.
import sys

# Import numpy for counts/starts arrays.
import numpy as np

# Try importing mpi4py; allow serial fallback.
try:
    from mpi4py import MPI  # type: ignore
    HAVE_MPI = True
except Exception:
    MPI = None  # type: ignore
    HAVE_MPI = False


@dataclass(frozen=True)
class MPIConfig:
    """User-facing MPI configuration resolved from JSON/CLI."""

    enabled: bool

    @classmethod
    def from_dict(cls, cfg: dict, world_size: int | None = None) -> "MPIConfig":
        """Build MPIConfig with safe defaults."""
        world = int(world_size) if world_size is not None else 1
        enabled_raw = cfg.get("enabled", None)
        enabled = bool(enabled_raw) if enabled_raw is not None else (HAVE_MPI and world > 1)
        # If mpi4py is missing, force-disable even if the user requested it.
        if enabled and not HAVE_MPI:
            enabled = False
        return cls(enabled=enabled)


def world_size() -> int:
    """Number of ranks in COMM_WORLD (1 without mpi4py)."""
    return MPI.COMM_WORLD.Get_size() if HAVE_MPI else 1


def initialize_mpi(mpi_cfg: MPIConfig) -> Tuple[Any, int, int, bool]:
    """Return (comm, rank, size, active) honoring user MPI preferences."""
    if not HAVE_MPI:
        return None, 0, 1, False

    world = MPI.COMM_WORLD
    world_rank = world.Get_rank()
    world_n = world.Get_size()

    # Auto-disable when only one rank is present.
    if world_n == 1:
        return None, 0, 1, False

    # Respect explicit disable requests even if launched under mpirun.
    if not mpi_cfg.enabled:
        if world_rank != 0:
            # Non-root ranks exit quietly so only rank0 proceeds in serial mode.
            MPI.Finalize()
            sys.exit(0)
        return None, 0, 1, False

    return world, world_rank, world_n, True


def even_counts_starts(n_items: int, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Compute per-rank item counts and starts (remainder goes to the first ranks)."""
    # Start with floor division.
    counts = np.full(size, n_items // size, dtype=np.int32)
    # Distribute remainder to the first ranks.
    counts[: (n_items % size)] += 1
    # Compute starts as prefix sums of counts.
    starts = np.zeros(size, dtype=np.int32)
    starts[1:] = np.cumsum(counts[:-1])
    return counts, starts


def local_items(items: Sequence[Any], rank: int, size: int) -> List[Any]:
    """Return the contiguous share of `items` owned by `rank`."""
    counts, starts = even_counts_starts(len(items), size)
    s0 = int(starts[rank])
    return list(items[s0 : s0 + int(counts[rank])])


def gather_records_to_rank0(comm: Any, local: np.ndarray) -> Optional[np.ndarray]:
    """Gather a 1-D structured array from all ranks to rank 0 (rank order preserved)."""
    if comm is None:
        return local
    rank = comm.Get_rank()
    # Exchange byte counts first, then the raw payload.
    raw = np.ascontiguousarray(local).view(np.uint8).ravel()
    counts = np.array(comm.gather(int(raw.size), root=0) or [], dtype=np.int64)
    recv = None
    if rank == 0:
        displs = np.zeros(counts.size, dtype=np.int64)
        displs[1:] = np.cumsum(counts[:-1])
        flat = np.empty(int(counts.sum()), dtype=np.uint8)
        recv = [flat, counts, displs, MPI.BYTE]
    comm.Gatherv(raw, recv, root=0)
    if rank != 0:
        return None
    return flat.view(local.dtype)
