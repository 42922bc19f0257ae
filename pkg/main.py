#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""simon32lab entry point.

This file is intentionally small:
- parse CLI
- load+merge configuration
- initialize MPI (optional)
- dispatch the requested pipeline stage
- map failures to exit codes

All real logic lives in the `simon32lab/` package.
"""

# Import logging (for module-level logger).
import logging

# Import stdlib helpers.
import argparse
import importlib.util
import sys
from typing import Any, Dict, List, Optional


def _require_numpy() -> None:
    """Validate that NumPy is available before importing simon32lab modules."""
    if importlib.util.find_spec("numpy") is None:
        raise ModuleNotFoundError(
            "NumPy is required to run simon32lab. Activate your virtual environment "
            f"or install it with '{sys.executable} -m pip install numpy'."
        )


def apply_overrides(cfg: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    """Apply CLI overrides (only options that were explicitly supplied)."""
    if args.word_size is not None:
        cfg["cipher"]["word_size"] = args.word_size
    if args.pddt_threshold is not None:
        cfg["pddt"]["threshold"] = args.pddt_threshold
    if args.pddt_compare is not None:
        cfg["pddt"]["compare"] = args.pddt_compare
    if args.sig_threshold is not None:
        cfg["sort"]["sig_threshold"] = args.sig_threshold
    if args.sample_percent is not None:
        cfg["sort"]["sample_percent"] = args.sample_percent
    if args.stratum is not None:
        cfg["sort"]["stratum"] = args.stratum
    if args.rounds is not None:
        cfg["experiment"]["rounds"] = args.rounds
    if args.trials is not None:
        cfg["experiment"]["trials"] = args.trials
    if args.hw_mode is not None:
        cfg["experiment"]["hw_mode"] = args.hw_mode
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.extract_threshold is not None:
        cfg["extract"]["hw_threshold"] = args.extract_threshold
    if args.selection is not None:
        cfg["extract"]["selection"] = args.selection
    if args.trail_rounds is not None:
        cfg["trails"]["rounds"] = args.trail_rounds
    if args.out is not None:
        cfg["output"]["dir"] = args.out
    if args.format is not None:
        cfg["output"]["format"] = args.format
    if args.no_svg:
        cfg["output"]["svg"] = False
    # Parallelism overrides never reach output metadata.
    compute = cfg.setdefault("compute", {})
    if args.workers is not None:
        shm = compute.setdefault("shared_memory", {})
        shm["workers"] = args.workers
        shm["enabled"] = args.workers > 1
    if args.mpi_mode is not None:
        compute.setdefault("mpi", {})["enabled"] = {"enabled": True, "disabled": False}.get(args.mpi_mode)
    # Subcommand-specific options.
    if getattr(args, "differentials", None) is not None:
        cfg["validate"]["differentials"] = args.differentials
    if getattr(args, "validate_trials", None) is not None:
        cfg["validate"]["trials"] = args.validate_trials
    if getattr(args, "validate_target", None) is not None:
        cfg["validate"]["target"] = args.validate_target
    return cfg


def build_config(args: argparse.Namespace) -> Dict[str, Any]:
    """Defaults, then the optional JSON file, then CLI overrides."""
    _require_numpy()

    # Import config helpers (they pull in numpy through the pDDT module).
    from simon32lab.config import deep_update, default_config, load_json

    cfg = default_config()
    if args.config is not None:
        cfg = deep_update(cfg, load_json(args.config))
    return apply_overrides(cfg, args)


def run(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand and return the process exit code."""
    _require_numpy()

    # Import CLI parser.
    from simon32lab.cli import parse_args

    # Import error mapping.
    from simon32lab.errors import EXIT_OK, exit_code_for

    # Import logging configuration.
    from simon32lab.logging_utils import setup_logging

    # Import MPI utilities.
    from simon32lab.mpi_utils import MPIConfig, initialize_mpi, world_size

    # Import stage drivers.
    from simon32lab import pipeline

    args = parse_args(argv)
    logger = logging.getLogger("simon32lab")
    rank = 0
    try:
        cfg = build_config(args)

        # Resolve MPI preferences and initialize communicator after config parsing.
        mpi_cfg = MPIConfig.from_dict(cfg["compute"].get("mpi", {}) or {}, world_size=world_size())
        comm, rank, size, mpi_active = initialize_mpi(mpi_cfg)

        # Configure logging (include rank so MPI logs are distinguishable).
        setup_logging(args.log_level, rank)
        if rank == 0:
            logger.info("simon32lab %s (MPI active=%s, ranks=%d)", args.command, mpi_active, size)

        ctx = pipeline.StageContext.from_config(cfg, comm=comm, rank=rank, size=size)
        if args.command == "pddt-build":
            pipeline.cmd_pddt_build(ctx)
        elif args.command == "run-all":
            pipeline.cmd_run_all(ctx)
        elif rank != 0:
            # Only the pDDT build is distributed; other stages run on rank 0.
            return EXIT_OK
        elif args.command == "sort":
            pipeline.cmd_sort(ctx, args.pddt)
        elif args.command == "experiment":
            pipeline.cmd_experiment(ctx, args.significant, args.sample)
        elif args.command == "trails":
            pipeline.cmd_trails(ctx, args.significant, args.promising)
        elif args.command == "validate":
            pipeline.cmd_validate(ctx)
    except Exception as exc:  # noqa: BLE001
        code = exit_code_for(exc)
        if code == 1:
            raise
        # Logging may not be configured yet when the config itself is invalid.
        setup_logging(args.log_level, rank)
        logger.error("%s: %s", type(exc).__name__, exc)
        return code
    return EXIT_OK


def main() -> None:
    """Program entry point."""
    sys.exit(run())


if __name__ == "__main__":
    main()
