# -*- coding: utf-8 -*-
"""File-format constants and reference values shared across simon32lab outputs."""

from __future__ import annotations

# Binary pDDT header: magic, word size (u8), max weight (u8), entry count (u64 LE).
PDDT_MAGIC_PREFIX = b"PDDT"
PDDT_FORMAT_VERSION = b"1"
PDDT_MAGIC = PDDT_MAGIC_PREFIX + PDDT_FORMAT_VERSION
PDDT_HEADER_FORMAT = "<5sBBQ"
# Max-weight byte value meaning "no weight is admissible" (threshold above 1).
PDDT_NO_WEIGHT = 255
# Binary entries only hold 16-bit words.
PDDT_MAX_WORD_SIZE = 16

# CSV headers.
PDDT_CSV_COLUMNS = ("a", "b", "c", "log2p")
HW_SAMPLE_COLUMNS = ("a", "b", "c", "log2p", "trial", "hw")
HISTOGRAM_COLUMNS = ("bin_lo", "bin_hi", "count")
BOXPLOT_COLUMNS = ("label", "min", "q1", "median", "q3", "max")
HEATMAP_COLUMNS = ("row", "col", "count", "mean_hw")
TTEST_COLUMNS = ("t", "p", "df")
SUMMARY_COLUMNS = ("metric", "value")
TRAIL_COLUMNS = ("round", "dL", "dR", "log2p")
PROMISING_COLUMNS = ("a", "b", "c", "log2p", "hw")
TRAIL_REPORT_COLUMNS = ("rank", "a", "b", "c", "rounds", "log2p", "verdict", "cycle_start", "cycle_length")
COMPARISON_COLUMNS = ("cipher", "rounds", "probability", "year", "reference")
MONTECARLO_COLUMNS = ("dL", "dR", "target_dL", "target_dR", "trials", "estimate", "stderr", "exact", "z")

# Prefix of metadata lines in CSV outputs.
SIDECAR_SUFFIX = ".meta.json"
CSV_COMMENT = "# "

# Heatmap binning of the 16-bit input space.
HEATMAP_BINS = 64
HEATMAP_BIN_WIDTH = 1024

# Quantile convention stated in every boxplot output.
QUANTILE_METHOD = "linear (type 7)"

# Reference values reproduced by the default pipeline.
REFERENCE_PDDT_WORD_SIZE = 16
REFERENCE_PDDT_THRESHOLD = 0.1
# Published entry count for n=16, p=0.1; the closed form gives EXACT_PDDT_COUNT.
PUBLISHED_PDDT_COUNT = 3_951_388
EXACT_PDDT_COUNT = 408_604
REFERENCE_PROMISING_COUNT = 31
REFERENCE_TRAIL_DIFFERENTIAL = (0x8000, 0x8000, 0x0000)
REFERENCE_TRAIL_ROUNDS = 20
REFERENCE_TRAIL_WEIGHT = 32
REFERENCE_TEN_ROUND_WEIGHT = 17
