# -*- coding: utf-8 -*-
"""Hamming-weight distribution experiments and their statistics.

An experiment injects a differential's input pair (a, b) as the round-state
difference and sums hw(dL ^ dR) over the states after rounds 1..rounds.
Three modes are available:

* ``paper``     deterministic round model (identical across trials)
* ``empirical`` real SIMON rounds, fresh random key and plaintext per trial
* ``unkeyed``   real SIMON rounds with all-zero round keys
"""

from __future__ import annotations

# Import dataclass for structured results.
from dataclasses import dataclass, field

# Import typing primitives.
from typing import Any, List, Optional, Sequence, Tuple

# Import stdlib helpers.
import logging
import math

# Import numpy and scipy.
import numpy as np
from scipy import stats

# Import tqdm for progress reporting on long batches.
from tqdm import tqdm

# Import local helpers.
from .bitops import hw_array, word_dtype
from .diff_models import paper_model_hw
from .errors import ContractError
from .pddt import DiffTriple, PartialDDT
from .schema import HEATMAP_BIN_WIDTH, HEATMAP_BINS, QUANTILE_METHOD
from .shared_memory import SharedMemoryConfig, chunk_bounds, map_ordered
from .simon_core import SIMON32_64, CipherState, SimonParams, iterate_pair, key_schedule, zero_schedule

logger = logging.getLogger("simon32lab")

HW_MODES = ("paper", "empirical", "unkeyed")

# Normal approximation replaces the t distribution above this many degrees of freedom.
NORMAL_APPROX_DF = 100


# ---------------------------------------------------------------------------
# Hamming-weight experiments
# ---------------------------------------------------------------------------


def _check_mode(mode: str) -> None:
    if mode not in HW_MODES:
        raise ContractError(f"hw mode must be one of {HW_MODES}, got {mode!r}")


def _draws(seed: int, stream: int, index: np.ndarray, trials: int, words: int, n: int) -> np.ndarray:
    """Random words of shape (len(index), trials, words); row i comes from generator (seed, stream, index[i])."""
    out = np.empty((index.size, trials, words), dtype=word_dtype(n))
    for i, idx in enumerate(index):
        rng = np.random.default_rng([int(seed), int(stream), int(idx)])
        out[i] = rng.integers(0, 1 << n, size=(trials, words), dtype=np.uint64).astype(out.dtype)
    return out


def _keyed_hw(
    a: np.ndarray,
    b: np.ndarray,
    index: np.ndarray,
    trials: int,
    rounds: int,
    mode: str,
    seed: int,
    stream: int,
    params: SimonParams,
) -> np.ndarray:
    """Per-trial hw sums through real SIMON rounds, shape (len(a), trials)."""
    n = params.word_size
    dt = word_dtype(n)
    m = params.key_words
    words = 2 + (m if mode == "empirical" else 0)
    d = _draws(seed, stream, index, trials, words, n).reshape(-1, words)
    left, right = d[:, 0], d[:, 1]
    dl = np.repeat(a.astype(dt), trials)
    dr = np.repeat(b.astype(dt), trials)
    p0 = CipherState(left, right)
    p1 = CipherState(left ^ dl, right ^ dr)
    if mode == "empirical":
        keys = key_schedule([d[:, 2 + i] for i in range(m)], params)
    else:
        keys = zero_schedule(rounds, np.zeros(left.shape, dtype=dt))
    total = np.zeros(left.shape, dtype=np.int64)
    for s in iterate_pair(p0, p1, rounds, keys, params):
        total += hw_array(s.dL ^ s.dR)
    return total.reshape(a.size, trials)


def hw_batch(
    table: PartialDDT,
    trials: int,
    rounds: int = 10,
    mode: str = "empirical",
    seed: int = 0,
    stream: int = 0,
    params: SimonParams = SIMON32_64,
    shm_cfg: SharedMemoryConfig | None = None,
    progress: bool = False,
    desc: str = "HW experiment",
) -> np.ndarray:
    """Hamming-weight sums for every entry of `table`, shape (len(table), trials).

    Differential i uses its own generator seeded with (seed, stream, i), so the
    result does not depend on chunking or worker count.
    """
    _check_mode(mode)
    if trials < 1:
        raise ContractError(f"trials must be >= 1, got {trials}")
    if rounds < 1:
        raise ContractError(f"rounds must be >= 1, got {rounds}")
    if mode == "empirical" and rounds > params.rounds:
        raise ContractError(f"empirical mode supports at most {params.rounds} rounds, got {rounds}")
    a = table.a.astype(np.uint32)
    b = table.b.astype(np.uint32)
    if mode == "paper":
        base = paper_model_hw(a, b, rounds, params.word_size)
        return np.repeat(base[:, None], trials, axis=1)

    per_chunk = max(1, (shm_cfg.chunk_size if shm_cfg is not None else 4096) // trials)
    bounds = chunk_bounds(len(table), per_chunk)
    with tqdm(total=len(table), desc=desc, unit="diff", disable=not progress) as bar:

        def _run(bound: Tuple[int, int]) -> np.ndarray:
            s0, s1 = bound
            idx = np.arange(s0, s1, dtype=np.int64)
            part = _keyed_hw(a[s0:s1], b[s0:s1], idx, trials, rounds, mode, seed, stream, params)
            bar.update(s1 - s0)
            return part

        parts = map_ordered(_run, bounds, shm_cfg, n_items=len(table) * trials)
    if not parts:
        return np.zeros((0, trials), dtype=np.int64)
    return np.concatenate(parts, axis=0)


def run_hw_experiment(
    d: DiffTriple,
    num_trials: int,
    rounds: int = 10,
    mode: str = "empirical",
    seed: int = 0,
    params: SimonParams = SIMON32_64,
) -> List[int]:
    """Hamming-weight sums of one differential over `num_trials` trials."""
    if num_trials < 1:
        raise ContractError(f"num_trials must be >= 1, got {num_trials}")
    table = PartialDDT.from_triples([d], word_size=params.word_size)
    return [int(v) for v in hw_batch(table, num_trials, rounds, mode, seed, params=params)[0]]


@dataclass
class HwSampleSet:
    """Labelled hw measurements: one row of `hw` per table entry, one column per trial."""

    label: str
    table: PartialDDT
    hw: np.ndarray
    mode: str
    rounds: int

    def __post_init__(self) -> None:
        if self.hw.shape[0] != len(self.table):
            raise ContractError(f"{self.label}: {self.hw.shape[0]} hw rows for {len(self.table)} entries")

    @property
    def samples(self) -> List[Tuple[DiffTriple, int]]:
        return [(t, int(v)) for t, row in zip(self.table, self.hw) for v in row]

    def flat(self) -> np.ndarray:
        return self.hw.ravel()

    def per_diff_mean(self) -> np.ndarray:
        return self.hw.mean(axis=1) if self.hw.size else np.zeros(0)

    def per_diff_min(self) -> np.ndarray:
        return self.hw.min(axis=1) if self.hw.size else np.zeros(0, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.table)


def run_sample_set(
    label: str,
    table: PartialDDT,
    trials: int,
    rounds: int,
    mode: str,
    seed: int,
    stream: int,
    params: SimonParams = SIMON32_64,
    shm_cfg: SharedMemoryConfig | None = None,
    progress: bool = False,
) -> HwSampleSet:
    """Run `hw_batch` over a table and wrap the result."""
    logger.info("Running %s experiment: %d differentials x %d trials, %d rounds, mode=%s", label, len(table), trials, rounds, mode)
    hw = hw_batch(table, trials, rounds, mode, seed, stream, params, shm_cfg, progress, desc=label)
    return HwSampleSet(label=label, table=table, hw=hw, mode=mode, rounds=rounds)


# ---------------------------------------------------------------------------
# Histograms and boxplots
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HistogramBin:
    lo: float
    hi: float
    count: int


def histogram(samples: Sequence[float] | np.ndarray, bin_count: int, value_range: Optional[Tuple[float, float]] = None) -> List[HistogramBin]:
    """Equal-width bins over `value_range` (default: sample min..max+1); last bin is closed."""
    if bin_count < 1:
        raise ContractError(f"bin_count must be >= 1, got {bin_count}")
    x = np.asarray(samples, dtype=np.float64)
    if value_range is None:
        value_range = (float(x.min()), float(x.max()) + 1.0) if x.size else (0.0, 1.0)
    counts, edges = np.histogram(x, bins=bin_count, range=value_range)
    return [HistogramBin(float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(bin_count)]


def shared_range(*sets: np.ndarray) -> Tuple[float, float]:
    """Common histogram range covering every non-empty sample array."""
    vals = [np.asarray(s) for s in sets if np.size(s)]
    if not vals:
        return (0.0, 1.0)
    lo = min(float(v.min()) for v in vals)
    hi = max(float(v.max()) for v in vals)
    return (lo, hi + 1.0)


@dataclass(frozen=True)
class BoxplotStats:
    """Five-number summary with 1.5 x IQR outliers."""

    label: str
    count: int
    min: float
    q1: float
    median: float
    q3: float
    max: float
    whisker_lo: float
    whisker_hi: float
    mean: float
    skewness: float
    outliers: Tuple[float, ...] = field(default_factory=tuple)
    quantile_method: str = QUANTILE_METHOD


def boxplot_stats(samples: Sequence[float] | np.ndarray, label: str = "") -> BoxplotStats:
    """Summary statistics with linear-interpolation quantiles."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise ContractError("boxplot of an empty sample")
    q1, med, q3 = np.percentile(x, [25, 50, 75], method="linear")
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    outl = np.sort(x[(x < lo_fence) | (x > hi_fence)])
    skew = float(stats.skew(x)) if x.size > 2 and float(np.std(x)) > 0 else 0.0
    return BoxplotStats(
        label=label,
        count=int(x.size),
        min=float(x.min()),
        q1=float(q1),
        median=float(med),
        q3=float(q3),
        max=float(x.max()),
        whisker_lo=float(inside.min()),
        whisker_hi=float(inside.max()),
        mean=float(x.mean()),
        skewness=skew,
        outliers=tuple(float(v) for v in outl),
    )


# ---------------------------------------------------------------------------
# Heatmap
# ---------------------------------------------------------------------------


@dataclass
class HeatmapGrid:
    """64 x 64 grid over (a // 1024, b // 1024); empty cells hold NaN means."""

    count: np.ndarray
    mean_hw: np.ndarray
    bin_width: int = HEATMAP_BIN_WIDTH

    @property
    def shape(self) -> Tuple[int, int]:
        return tuple(self.count.shape)  # type: ignore[return-value]

    def cells(self) -> List[Tuple[int, int, int, Optional[float]]]:
        """(row, col, count, mean or None) for all cells in row-major order."""
        out = []
        rows, cols = self.count.shape
        for i in range(rows):
            for j in range(cols):
                n = int(self.count[i, j])
                out.append((i, j, n, float(self.mean_hw[i, j]) if n else None))
        return out


def heatmap_from_values(a: np.ndarray, b: np.ndarray, values: np.ndarray) -> HeatmapGrid:
    """Average per-differential values into (a // 1024, b // 1024) cells."""
    rows = np.asarray(a, dtype=np.int64) // HEATMAP_BIN_WIDTH
    cols = np.asarray(b, dtype=np.int64) // HEATMAP_BIN_WIDTH
    flat = rows * HEATMAP_BINS + cols
    ncell = HEATMAP_BINS * HEATMAP_BINS
    count = np.bincount(flat, minlength=ncell).reshape(HEATMAP_BINS, HEATMAP_BINS)
    total = np.bincount(flat, weights=np.asarray(values, dtype=np.float64), minlength=ncell).reshape(HEATMAP_BINS, HEATMAP_BINS)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(count > 0, total / np.maximum(count, 1), np.nan)
    return HeatmapGrid(count=count.astype(np.int64), mean_hw=mean)


def build_heatmap(
    entries: PartialDDT,
    mode: str = "paper",
    rounds: int = 10,
    seed: int = 0,
    trials: int = 1,
    hw: Optional[np.ndarray] = None,
    shm_cfg: SharedMemoryConfig | None = None,
) -> HeatmapGrid:
    """Mean hw per input-difference cell; `hw` reuses an existing (N, trials) measurement."""
    if entries.word_size != 16:
        raise ContractError(f"heatmap binning needs 16-bit words, got n={entries.word_size}")
    if hw is None:
        hw = hw_batch(entries, trials, rounds, mode, seed, shm_cfg=shm_cfg)
    per_diff = hw.mean(axis=1) if hw.size else np.zeros(len(entries))
    return heatmap_from_values(entries.a, entries.b, per_diff)


# ---------------------------------------------------------------------------
# Welch's t-test
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StatTestResult:
    t_statistic: float
    p_value: float
    df: float
    method: str


def welch_t_test(a_samples: Sequence[float] | np.ndarray, b_samples: Sequence[float] | np.ndarray, p_method: str = "auto") -> StatTestResult:
    """Welch's unequal-variance t-test with a two-sided p-value.

    p_method: ``auto`` (normal survival above 100 df, Student t otherwise),
    ``t`` or ``normal``.
    """
    if p_method not in ("auto", "t", "normal"):
        raise ContractError(f"p_method must be auto, t or normal, got {p_method!r}")
    a = np.asarray(a_samples, dtype=np.float64)
    b = np.asarray(b_samples, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ContractError(f"t-test needs at least two samples per set, got {a.size} and {b.size}")
    va = float(a.var(ddof=1)) / a.size
    vb = float(b.var(ddof=1)) / b.size
    if va + vb == 0.0:
        raise ContractError("t-test is undefined when both sets have zero variance")
    diff = float(a.mean()) - float(b.mean())
    t = diff / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (va * va / (a.size - 1) + vb * vb / (b.size - 1))
    use_normal = p_method == "normal" or (p_method == "auto" and df > NORMAL_APPROX_DF)
    if use_normal:
        p = 2.0 * float(stats.norm.sf(abs(t)))
        method = "normal"
    else:
        p = 2.0 * float(stats.t.sf(abs(t), df))
        method = "t"
    return StatTestResult(t_statistic=t, p_value=min(1.0, p), df=df, method=method)
