# -*- coding: utf-8 -*-
"""Pipeline stage drivers (one per CLI subcommand).

Stages and their files under the output directory:

pddt-build  pddt.bin (+ pddt.csv)
sort        significant.bin, non_significant.bin, non_significant_sample.bin
experiment  hw_*.csv, histogram_*, boxplot.*, heatmap.*, ttest.csv, summary.csv
trails      promising.csv, trails/, trail_report.csv, best_trail.csv,
            reference_trail.csv, comparison.csv, comparison.txt

Only rank 0 writes; binary files get a <name>.meta.json sidecar.
"""

from __future__ import annotations

# Import dataclass for the stage context.
from dataclasses import dataclass

# Import typing primitives.
from typing import Any, Dict, List, Optional, Tuple

# Import stdlib helpers.
import logging
import math
import time
from pathlib import Path

# Import numpy.
import numpy as np

# Import local modules.
from .bitops import word_mask
from .config import RunConfig
from .diff_models import and_zero_state, monte_carlo_dp, one_round_dp_exact, paper_model_state
from .errors import ContractError, EmptyResultError
from .experiments import (
    HwSampleSet,
    boxplot_stats,
    build_heatmap,
    histogram,
    run_sample_set,
    shared_range,
    welch_t_test,
)
from .io_reports import (
    build_metadata,
    format_aligned,
    hex_word,
    plot_boxplot,
    plot_heatmap,
    plot_histogram,
    read_table,
    write_heatmap_netcdf,
    write_meta_sidecar,
    write_pddt_table,
    write_table,
    write_text_report,
    write_trail,
)
from .logging_utils import progress_enabled
from .pddt import (
    PDDT_DTYPE,
    DiffTriple,
    PartialDDT,
    check_reference_count,
    compute_pddt,
    load_pddt,
    quota_sample,
    save_pddt,
    sort_differentials,
)
from .schema import (
    BOXPLOT_COLUMNS,
    COMPARISON_COLUMNS,
    HEATMAP_COLUMNS,
    HISTOGRAM_COLUMNS,
    HW_SAMPLE_COLUMNS,
    MONTECARLO_COLUMNS,
    PROMISING_COLUMNS,
    QUANTILE_METHOD,
    REFERENCE_PROMISING_COUNT,
    REFERENCE_TEN_ROUND_WEIGHT,
    REFERENCE_TRAIL_DIFFERENTIAL,
    SUMMARY_COLUMNS,
    TRAIL_REPORT_COLUMNS,
    TTEST_COLUMNS,
)
from .shared_memory import SharedMemoryConfig
from .simon_core import DiffState, SimonParams
from .trails import PromisingDiff, comparison_rows, extract_promising, generate_trail, trail_report

logger = logging.getLogger("simon32lab")

PDDT_FILE = "pddt.bin"
SIGNIFICANT_FILE = "significant.bin"
NON_SIGNIFICANT_FILE = "non_significant.bin"
SAMPLE_FILE = "non_significant_sample.bin"
PROMISING_FILE = "promising"

# PRNG stream ids keep the experiment sets independent of each other.
STREAM_SIGNIFICANT = 0
STREAM_NON_SIGNIFICANT = 1
STREAM_EXTRACT = 2
STREAM_VALIDATE = 3

SELECTION_NOTE = (
    "selection=zero_output keeps hw(c) <= hw_threshold; "
    "selection=exact keeps hw <= hw_threshold (strict zero at threshold 0); "
    "selection=near_zero keeps hw within hw_threshold of the lowest non-trivial hw"
)


@dataclass
class StageContext:
    """Everything a stage needs besides its input files."""

    run: RunConfig
    shm_cfg: SharedMemoryConfig
    comm: Any = None
    rank: int = 0
    size: int = 1

    @classmethod
    def from_config(cls, cfg: Dict[str, Any], comm: Any = None, rank: int = 0, size: int = 1) -> "StageContext":
        compute = cfg.get("compute", {}) if isinstance(cfg.get("compute", {}), dict) else {}
        shm_cfg = SharedMemoryConfig.from_dict(compute.get("shared_memory", {}) or {})
        return cls(run=RunConfig.from_dict(cfg), shm_cfg=shm_cfg, comm=comm, rank=rank, size=size)

    @property
    def params(self) -> SimonParams:
        return SimonParams(word_size=self.run.word_size, rotations=self.run.rotations)

    @property
    def out_dir(self) -> Path:
        return Path(self.run.output_dir)

    @property
    def progress(self) -> bool:
        return progress_enabled(self.rank)

    @property
    def is_root(self) -> bool:
        return self.rank == 0

    def meta(self, **extra: Any) -> Dict[str, Any]:
        return build_metadata(self.run.to_dict(), **extra)

    def path(self, name: str) -> Path:
        return self.out_dir / name


def _summary(line: str) -> None:
    """Print a stage summary line on stdout and in the log."""
    logger.info(line)
    print(line, flush=True)


def _save_binary(ctx: StageContext, t: PartialDDT, name: str, **extra: Any) -> Path:
    path = save_pddt(t, ctx.path(name))
    meta = ctx.meta(entries=len(t), max_weight=t.max_weight, threshold=t.threshold, compare=t.compare, **extra)
    write_meta_sidecar(path, meta)
    return path


def _triple_cells(t: DiffTriple, n: int) -> Tuple[str, str, str, int]:
    return hex_word(t.a, n), hex_word(t.b, n), hex_word(t.c, n), t.log2p


# ---------------------------------------------------------------------------
# pDDT construction
# ---------------------------------------------------------------------------


def cmd_pddt_build(ctx: StageContext) -> Optional[PartialDDT]:
    """Build the pDDT, write it (rank 0) and print its size and wall time."""
    run = ctx.run
    t0 = time.perf_counter()
    table = compute_pddt(run.word_size, run.pddt_threshold, run.pddt_compare, ctx.shm_cfg, ctx.comm)
    elapsed = time.perf_counter() - t0
    if not ctx.is_root:
        return None
    check_reference_count(table)
    path = _save_binary(ctx, table, PDDT_FILE)
    if run.export_csv:
        write_pddt_table(table, ctx.path("pddt"), ctx.meta(), run.format)
    _summary(
        f"pDDT: {len(table)} entries (n={run.word_size}, p {'>=' if run.pddt_compare == 'ge' else '>'} "
        f"{run.pddt_threshold}, max weight {table.max_weight}) -> {path} in {elapsed:.2f}s"
    )
    return table


# ---------------------------------------------------------------------------
# Sorting and sampling
# ---------------------------------------------------------------------------


def cmd_sort(ctx: StageContext, pddt_path: Optional[Path] = None) -> Tuple[PartialDDT, PartialDDT, PartialDDT]:
    """Split the table at the significance threshold and quota-sample the non-significant part."""
    run = ctx.run
    table = load_pddt(pddt_path or ctx.path(PDDT_FILE))
    parts = sort_differentials(table, run.sig_threshold)
    sample = quota_sample(parts.non_significant, run.sample_percent, run.stratum, seed=run.seed)
    _save_binary(ctx, parts.significant, SIGNIFICANT_FILE, sig_threshold=run.sig_threshold)
    _save_binary(ctx, parts.non_significant, NON_SIGNIFICANT_FILE, sig_threshold=run.sig_threshold)
    _save_binary(ctx, sample, SAMPLE_FILE, sample_percent=run.sample_percent, stratum=run.stratum)
    _summary(
        f"sort: {len(parts.significant)} significant, {len(parts.non_significant)} non-significant "
        f"(p >= {run.sig_threshold}); quota sample of {run.sample_percent}% -> {len(sample)} entries"
    )
    return parts.significant, parts.non_significant, sample


# ---------------------------------------------------------------------------
# Hamming-weight experiments
# ---------------------------------------------------------------------------


def _write_hw_samples(ctx: StageContext, s: HwSampleSet, name: str) -> Path:
    n = ctx.run.word_size
    trials = s.hw.shape[1] if s.hw.ndim == 2 else 0

    def rows():
        for i, t in enumerate(s.table):
            cells = _triple_cells(t, n)
            for k in range(trials):
                yield (*cells, k, int(s.hw[i, k]))

    return write_table(ctx.path(name), HW_SAMPLE_COLUMNS, rows(), ctx.meta(label=s.label, hw_mode=s.mode, rounds=s.rounds), ctx.run.format)


def _concat_sets(a: HwSampleSet, b: HwSampleSet) -> Tuple[PartialDDT, np.ndarray]:
    """Union of two sample sets as (table in input order, hw rows)."""
    entries = np.concatenate([a.table.entries, b.table.entries]).astype(PDDT_DTYPE)
    table = PartialDDT(entries, a.table.word_size, None)
    return table, np.concatenate([a.hw, b.hw], axis=0)


def cmd_experiment(
    ctx: StageContext,
    sig_path: Optional[Path] = None,
    sample_path: Optional[Path] = None,
) -> Dict[str, Any]:
    """Run both HW experiments and write samples, histograms, boxplots, heatmap and the t-test."""
    run = ctx.run
    sig_table = load_pddt(sig_path or ctx.path(SIGNIFICANT_FILE))
    non_table = load_pddt(sample_path or ctx.path(SAMPLE_FILE))
    common = dict(
        trials=run.trials,
        rounds=run.rounds_experiment,
        mode=run.hw_mode,
        seed=run.seed,
        params=ctx.params,
        shm_cfg=ctx.shm_cfg,
        progress=ctx.progress,
    )
    sig = run_sample_set("significant", sig_table, stream=STREAM_SIGNIFICANT, **common)
    non = run_sample_set("non-significant", non_table, stream=STREAM_NON_SIGNIFICANT, **common)
    _write_hw_samples(ctx, sig, "hw_significant")
    _write_hw_samples(ctx, non, "hw_non_significant")

    mode_meta = dict(hw_mode=run.hw_mode, rounds=run.rounds_experiment)

    # Histograms share one range so the two figures are comparable.
    hist_range = shared_range(sig.flat(), non.flat())
    for s, name in ((sig, "histogram_significant"), (non, "histogram_non_significant")):
        bins = histogram(s.flat(), run.histogram_bins, hist_range)
        hist_meta = ctx.meta(label=s.label, **mode_meta)
        write_table(ctx.path(name), HISTOGRAM_COLUMNS, [(b.lo, b.hi, b.count) for b in bins], hist_meta, run.format)
        if run.svg:
            plot_histogram(bins, ctx.path(name), f"Frequency distribution of {s.label} differentials", meta=hist_meta)

    # Boxplots.
    summaries = [boxplot_stats(s.flat(), s.label) for s in (sig, non) if s.hw.size]
    box_rows: List[Tuple[Any, ...]] = []
    for b in summaries:
        box_rows.append((b.label, b.min, b.q1, b.median, b.q3, b.max))
    for b in summaries:
        for v in b.outliers:
            box_rows.append((f"outlier:{b.label}", v, "", "", "", ""))
    box_meta = ctx.meta(quantile_method=QUANTILE_METHOD, **mode_meta)
    write_table(ctx.path("boxplot"), BOXPLOT_COLUMNS, box_rows, box_meta, run.format)
    if run.svg and summaries:
        plot_boxplot(summaries, ctx.path("boxplot"), meta=box_meta)

    # Heatmap over both experiment sets, reusing their measurements.
    heat = None
    if run.word_size == 16:
        table, hw = _concat_sets(sig, non)
        heat = build_heatmap(table, run.hw_mode, run.rounds_experiment, run.seed, hw=hw)
        heat_meta = ctx.meta(bin_width=heat.bin_width, **mode_meta)
        write_table(ctx.path("heatmap"), HEATMAP_COLUMNS, heat.cells(), heat_meta, run.format)
        if run.svg:
            plot_heatmap(heat, ctx.path("heatmap"), meta=heat_meta)
        if run.heatmap_netcdf:
            write_heatmap_netcdf(heat, ctx.path("heatmap"), ctx.meta(**mode_meta))
    else:
        logger.warning("Heatmap skipped: binning is defined for 16-bit words only (n=%d)", run.word_size)

    # Welch's t-test; degenerate sets are reported as an empty row.
    result: Dict[str, Any] = {"significant": len(sig), "non_significant": len(non)}
    try:
        tt = welch_t_test(sig.flat(), non.flat(), run.p_method)
        write_table(ctx.path("ttest"), TTEST_COLUMNS, [(tt.t_statistic, tt.p_value, tt.df)], ctx.meta(p_method=tt.method, **mode_meta), run.format)
        result.update(t=tt.t_statistic, p=tt.p_value, df=tt.df)
    except ContractError as exc:
        logger.warning("t-test not computed: %s", exc)
        write_table(ctx.path("ttest"), TTEST_COLUMNS, [], ctx.meta(error=str(exc), **mode_meta), run.format)

    summary_rows: List[Tuple[str, Any]] = []
    for b in summaries:
        summary_rows += [
            (f"{b.label}.count", b.count),
            (f"{b.label}.mean", b.mean),
            (f"{b.label}.skewness", b.skewness),
            (f"{b.label}.min", b.min),
        ]
    for key in ("t", "p", "df"):
        if key in result:
            summary_rows.append((f"ttest.{key}", result[key]))
    write_table(ctx.path("summary"), SUMMARY_COLUMNS, summary_rows, ctx.meta(**mode_meta), run.format)

    if "t" in result:
        strong = result["t"] < -10 and result["p"] < 1e-6
        log = logger.info if strong else logger.warning
        log("Significant vs non-significant: t=%.4f p=%.3g df=%.1f (strongly lower hw: %s)", result["t"], result["p"], result["df"], strong)
    _summary(
        f"experiment: {len(sig)} significant x {run.trials} trials, {len(non)} sampled non-significant, "
        f"mode={run.hw_mode}, rounds={run.rounds_experiment}"
        + (f", t={result['t']:.2f}, p={result['p']:.3g}" if "t" in result else ", t-test undefined")
    )
    return result


# ---------------------------------------------------------------------------
# Extraction and trails
# ---------------------------------------------------------------------------


def read_promising(path: Path) -> List[PromisingDiff]:
    """Load a promising-differential table written by the trails stage."""
    data = read_table(path)
    out = []
    for row in data.rows:
        t = DiffTriple(int(str(row["a"]), 16), int(str(row["b"]), 16), int(str(row["c"]), 16), -int(row["log2p"]))
        out.append(PromisingDiff(t, int(row["hw"])))
    return out


def cmd_trails(
    ctx: StageContext,
    sig_path: Optional[Path] = None,
    promising_path: Optional[Path] = None,
) -> Dict[str, Any]:
    """Extract promising differentials (unless given), build and rank their trails, write reports."""
    run = ctx.run
    n = run.word_size
    extract_meta = dict(
        hw_mode=run.extract_hw_mode,
        rounds=run.extract_rounds,
        selection=run.extract_selection,
        hw_threshold=run.extract_hw_threshold,
        note=SELECTION_NOTE,
    )
    if promising_path is not None:
        promising = read_promising(promising_path)
    else:
        sig = load_pddt(sig_path or ctx.path(SIGNIFICANT_FILE))
        promising = [] if len(sig) == 0 else extract_promising(
            sig,
            hw_threshold=run.extract_hw_threshold,
            rounds=run.extract_rounds,
            mode=run.extract_hw_mode,
            seed=run.seed,
            trials=run.extract_trials,
            selection=run.extract_selection,
            exclude_trivial=run.exclude_trivial,
            params=ctx.params,
            shm_cfg=ctx.shm_cfg,
        )
        write_table(
            ctx.path(PROMISING_FILE),
            PROMISING_COLUMNS,
            [(*_triple_cells(p.triple, n), p.observed_hw) for p in promising],
            ctx.meta(**extract_meta),
            run.format,
        )
    if len(promising) != REFERENCE_PROMISING_COUNT:
        logger.warning("Extracted %d promising differentials; expected %d", len(promising), REFERENCE_PROMISING_COUNT)
    else:
        logger.info("Extracted %d promising differentials (matches the reference count)", len(promising))
    non_zero_c = sum(1 for p in promising if p.triple.c != 0)
    pow2 = sum(1 for p in promising if p.triple.a and not p.triple.a & (p.triple.a - 1))
    logger.info("Promising set shape: %d with c != 0, %d with power-of-two a", non_zero_c, pow2)

    ranked = trail_report(promising, run.rounds_trail, run.block_bits, n, run.cycle_max_steps)
    trail_meta = dict(rounds=run.rounds_trail, block_bits=run.block_bits)
    report_rows = []
    for r in ranked:
        start, period = r.cycle if r.cycle is not None else ("", "")
        report_rows.append((r.rank, *_triple_cells(r.diff.triple, n)[:3], r.trail.rounds, r.trail.log2p, r.verdict, start, period))
    write_table(ctx.path("trail_report"), TRAIL_REPORT_COLUMNS, report_rows, ctx.meta(**trail_meta), run.format)
    if not ranked:
        raise EmptyResultError("no promising differentials; trail report is empty")

    for r in ranked:
        t = r.diff.triple
        write_trail(r.trail, ctx.path("trails") / f"trail_{r.rank:04d}", ctx.meta(differential=[t.a, t.b, t.c], **trail_meta), run.format, n)
    best = ranked[0]
    bt = best.diff.triple
    write_trail(best.trail, ctx.path("best_trail"), ctx.meta(differential=[bt.a, bt.b, bt.c], verdict=best.verdict, **trail_meta), run.format, n)
    best_short = generate_trail(bt, run.extract_rounds, n)
    logger.info("Best differential over %d rounds: log2p=%d", run.extract_rounds, best_short.log2p)

    ref = next((r for r in ranked if r.diff.triple.key() == REFERENCE_TRAIL_DIFFERENTIAL), None)
    if ref is not None:
        write_trail(ref.trail, ctx.path("reference_trail"), ctx.meta(differential=list(REFERENCE_TRAIL_DIFFERENTIAL), verdict=ref.verdict, **trail_meta), run.format, n)
        ref_short = generate_trail(ref.diff.triple, run.extract_rounds, n)
        if run.extract_rounds == 10 and ref_short.total_weight != REFERENCE_TEN_ROUND_WEIGHT:
            logger.warning("Reference differential 10-round weight %d, expected %d", ref_short.total_weight, REFERENCE_TEN_ROUND_WEIGHT)
    else:
        logger.info("Reference differential %s not in the promising set", tuple(hex(v) for v in REFERENCE_TRAIL_DIFFERENTIAL))

    comp = comparison_rows([best.trail])
    comp_meta = ctx.meta(**trail_meta)
    write_table(ctx.path("comparison"), COMPARISON_COLUMNS, comp, comp_meta, run.format)
    write_text_report(ctx.path("comparison.txt"), format_aligned(COMPARISON_COLUMNS, comp), comp_meta)

    _summary(
        f"trails: {len(ranked)} promising differentials; best {hex_word(bt.a, n)},{hex_word(bt.b, n)} -> {hex_word(bt.c, n)} "
        f"{run.rounds_trail} rounds log2p={best.trail.log2p} ({best.verdict}); "
        f"{run.extract_rounds}-round log2p={best_short.log2p}"
    )
    return {"promising": len(promising), "best": best, "best_short_weight": best_short.total_weight}


# ---------------------------------------------------------------------------
# Monte-Carlo validation of the deterministic model
# ---------------------------------------------------------------------------


def random_low_weight_differences(count: int, n: int, seed: int) -> List[DiffState]:
    """Alternating one-bit and two-bit (dL, dR) differences drawn from a seeded generator."""
    rng = np.random.default_rng([int(seed), STREAM_VALIDATE])
    out: List[DiffState] = []
    for i in range(count):
        bits = rng.choice(2 * n, size=1 + (i % 2), replace=False)
        v = 0
        for b in bits:
            v |= 1 << int(b)
        out.append(DiffState(v >> n, v & word_mask(n)))
    return out


def cmd_validate(ctx: StageContext) -> Dict[str, Any]:
    """Compare keyed Monte-Carlo estimates with the exact one-round kernel."""
    run = ctx.run
    params = ctx.params
    n = run.word_size
    rows = []
    within = 0
    reachable = 0
    for s0 in random_low_weight_differences(run.validate_differentials, n, run.seed):
        if run.validate_target == "model":
            target = paper_model_state(s0, run.validate_rounds, n)
        else:
            target = and_zero_state(s0, run.validate_rounds, params)
        est = monte_carlo_dp(s0, run.validate_rounds, run.validate_trials, run.seed, target=target, params=params)
        exact: Any = ""
        z: Any = ""
        if run.validate_rounds == 1:
            p = one_round_dp_exact(s0, target, params).probability
            sigma = math.sqrt(p * (1.0 - p) / est.trials)
            diff = est.estimate - p
            z = 0.0 if diff == 0 else (diff / sigma if sigma > 0 else math.inf)
            within += abs(z) <= 3.0
            reachable += p > 0
            exact = p
        rows.append((hex_word(s0.dL, n), hex_word(s0.dR, n), hex_word(target.dL, n), hex_word(target.dR, n), est.trials, est.estimate, est.stderr, exact, z))
    meta = ctx.meta(rounds=run.validate_rounds, target=run.validate_target)
    write_table(ctx.path("montecarlo"), MONTECARLO_COLUMNS, rows, meta, run.format)
    if run.validate_rounds == 1:
        _summary(
            f"validate: {within}/{len(rows)} one-round estimates within 3 sigma of the exact kernel "
            f"({reachable} reachable targets, target={run.validate_target})"
        )
    else:
        _summary(f"validate: {len(rows)} {run.validate_rounds}-round estimates written (target={run.validate_target})")
    return {"rows": len(rows), "within_3sigma": within, "reachable": reachable}


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------


def cmd_run_all(ctx: StageContext) -> Dict[str, Any]:
    """Every stage in order; non-root ranks only help with the pDDT build."""
    t0 = time.perf_counter()
    cmd_pddt_build(ctx)
    if not ctx.is_root:
        return {}
    cmd_sort(ctx)
    stats = cmd_experiment(ctx)
    trails = cmd_trails(ctx)
    logger.info("run-all finished in %.2fs", time.perf_counter() - t0)
    return {"experiment": stats, "trails": trails}
