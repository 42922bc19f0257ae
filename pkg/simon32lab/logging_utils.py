# -*- coding: utf-8 -*-
"""Logging utilities for simon32lab."""

# Import the standard logging module.
import logging

# Package-wide logger name.
LOGGER_NAME = "simon32lab"


def setup_logging(level: str, rank: int = 0) -> None:
    """Configure Python logging with a rank-aware format.

    Parameters
    ----------
    level : str
        Logging level name (e.g., 'DEBUG', 'INFO').
    rank : int
        MPI rank (0 in serial).
    """
    # Convert the level string into an actual numeric level (defaults to INFO).
    numeric_level = getattr(logging, level.upper(), logging.INFO)
    # Configure the root logger once (basicConfig is a no-op if already configured).
    logging.basicConfig(
        level=numeric_level,
        format=f"%(asctime)s [%(levelname)s] rank={rank} %(name)s: %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )


def progress_enabled(rank: int = 0) -> bool:
    """Return True when tqdm progress bars should be shown on this rank."""
    return rank == 0 and logging.getLogger(LOGGER_NAME).isEnabledFor(logging.INFO)
