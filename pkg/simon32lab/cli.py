# -*- coding: utf-8 -*-
"""Command line interface for simon32lab."""

# Import argparse for CLI parsing.
import argparse

# Import typing primitives.
from typing import List, Optional

# Subcommands, one per pipeline stage plus the chained run.
COMMANDS = ("pddt-build", "sort", "experiment", "trails", "validate", "run-all")


def _common_parser() -> argparse.ArgumentParser:
    """Options shared by every subcommand (all default to None: unset means 'keep config')."""
    p = argparse.ArgumentParser(add_help=False)
    # Configuration file path (optional; built-in defaults otherwise).
    p.add_argument("--config", default=None, help="Path to configuration JSON file.")
    # Logging level.
    p.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    # Cipher / table parameters.
    p.add_argument("--word-size", default=None, type=int, help="Word size n in bits (16 for SIMON32).")
    p.add_argument("--pddt-threshold", default=None, type=float, help="pDDT probability threshold (default 0.1).")
    p.add_argument("--pddt-compare", default=None, choices=["ge", "gt"], help="Keep p >= threshold (ge) or p > threshold (gt).")
    p.add_argument("--sig-threshold", default=None, type=float, help="Significance threshold for sorting (default 0.5).")
    p.add_argument("--sample-percent", default=None, type=float, help="Quota sample percentage per stratum.")
    p.add_argument("--stratum", default=None, choices=["hw_c", "weight", "hw_input"], help="Stratum function for quota sampling.")
    # Experiment parameters.
    p.add_argument("--rounds", default=None, type=int, help="Rounds of the Hamming-weight experiment.")
    p.add_argument("--trials", default=None, type=int, help="Trials per differential.")
    p.add_argument("--hw-mode", default=None, choices=["paper", "empirical", "unkeyed"], help="Hamming-weight measurement mode.")
    p.add_argument("--seed", default=None, type=int, help="Master seed.")
    # Extraction and trails.
    p.add_argument("--extract-threshold", default=None, type=int, help="Hamming-weight threshold for promising differentials.")
    p.add_argument("--selection", default=None, choices=["zero_output", "exact", "near_zero"], help="Promising-differential selection rule.")
    p.add_argument("--trail-rounds", default=None, type=int, help="Rounds per differential trail (default 20).")
    # Parallelism.
    p.add_argument("--workers", default=None, type=int, help="Thread workers (default: available cores).")
    p.add_argument(
        "--mpi-mode",
        default=None,
        choices=["auto", "enabled", "disabled"],
        help="Force MPI on/off or auto-detect based on launcher.",
    )
    # Output.
    p.add_argument("--out", default=None, help="Output directory (default: $SIMON32LAB_OUT or ./simon32lab_out).")
    p.add_argument("--format", default=None, choices=["csv", "json"], help="Table output format.")
    p.add_argument("--no-svg", action="store_true", help="Skip SVG figures.")
    return p


def build_parser() -> argparse.ArgumentParser:
    """Return the top-level parser with one subparser per stage."""
    common = _common_parser()
    ap = argparse.ArgumentParser(prog="simon32lab", description="SIMON32 differential cryptanalysis workbench.")
    sub = ap.add_subparsers(dest="command", required=True)

    sub.add_parser("pddt-build", parents=[common], help="Build the partial DDT.")

    sp = sub.add_parser("sort", parents=[common], help="Split into significant / non-significant and sample.")
    sp.add_argument("--pddt", default=None, help="Input pDDT file (default: <out>/pddt.bin).")

    sp = sub.add_parser("experiment", parents=[common], help="Hamming-weight experiments and statistics.")
    sp.add_argument("--significant", default=None, help="Significant set (default: <out>/significant.bin).")
    sp.add_argument("--sample", default=None, help="Sampled non-significant set (default: <out>/non_significant_sample.bin).")

    sp = sub.add_parser("trails", parents=[common], help="Extract promising differentials and evaluate trails.")
    sp.add_argument("--significant", default=None, help="Significant set used for extraction.")
    sp.add_argument("--promising", default=None, help="Existing promising table (skips extraction).")

    sp = sub.add_parser("validate", parents=[common], help="Monte-Carlo check of the one-round model.")
    sp.add_argument("--differentials", default=None, type=int, help="Number of random low-weight differences.")
    sp.add_argument("--validate-trials", default=None, type=int, help="Plaintext pairs per difference.")
    sp.add_argument("--validate-target", default=None, choices=["and_zero", "model"], help="Target difference: zero AND transition or the deterministic prediction.")

    sub.add_parser("run-all", parents=[common], help="All stages in one run.")
    return ap


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command-line arguments."""
    return build_parser().parse_args(argv)
