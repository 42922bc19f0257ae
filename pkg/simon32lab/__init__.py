# -*- coding: utf-8 -*-
"""simon32lab package.

Differential-cryptanalysis workbench for the SIMON32 block cipher:
threshold-pruned partial DDTs, significance sorting and quota sampling,
Hamming-weight experiments, and deterministic differential trails.

The top-level executable is `main.py` (in the project root).
"""

# Expose a version string for provenance (written into every output header).
__version__ = "1.0.0"

__all__ = ["__version__"]
