# -*- coding: utf-8 -*-
"""Report I/O for simon32lab (rank0 only).

Tables are written as CSV with ``# `` metadata lines or as a JSON document;
both carry the artifact version and the run configuration. SVG figures are
rendered with matplotlib's Agg backend with a fixed hash salt and no date, so
reruns produce identical bytes.
"""

from __future__ import annotations

# Import JSON for metadata headers.
import csv
import json

# Import stdlib helpers.
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

# Import typing primitives.
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

# Import numpy.
import numpy as np

# Import matplotlib (headless backend).
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# Try importing xarray; the NetCDF heatmap is optional.
try:
    import xarray as xr  # type: ignore  # noqa: E402
    HAVE_XARRAY = True
except Exception:
    xr = None  # type: ignore
    HAVE_XARRAY = False

# Import local helpers.
from . import __version__  # noqa: E402
from .errors import ConfigError, ContractError  # noqa: E402
from .experiments import BoxplotStats, HeatmapGrid, HistogramBin  # noqa: E402
from .pddt import PartialDDT  # noqa: E402
from .schema import CSV_COMMENT, PDDT_CSV_COLUMNS, SIDECAR_SUFFIX, TRAIL_COLUMNS  # noqa: E402
from .trails import Trail  # noqa: E402

ARTIFACT = "simon32lab"

# Reproducible SVG output.
matplotlib.rcParams["svg.hashsalt"] = ARTIFACT
matplotlib.rcParams["svg.fonttype"] = "none"

PathLike = Union[str, Path]


def build_metadata(config: Optional[Dict[str, Any]], **extra: Any) -> Dict[str, Any]:
    """Metadata block embedded in every output."""
    meta: Dict[str, Any] = {"artifact": ARTIFACT, "version": __version__}
    if config is not None:
        meta["config"] = config
    for k in sorted(extra):
        meta[k] = extra[k]
    return meta


def hex_word(v: int, n: int = 16) -> str:
    """0x-prefixed, zero-padded hex of an n-bit word."""
    return f"0x{int(v):0{(n + 3) // 4}x}"


def _cell(v: Any) -> Any:
    """Normalize a value for CSV/JSON (NaN/None become empty/null)."""
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return None if math.isnan(f) else f
    return v


def _csv_text(v: Any) -> str:
    v = _cell(v)
    return "" if v is None else str(v)


def _meta_lines(meta: Dict[str, Any]) -> List[str]:
    lines = [f"{CSV_COMMENT}{meta.get('artifact', ARTIFACT)} {meta.get('version', __version__)}"]
    for k, v in meta.items():
        if k in ("artifact", "version"):
            continue
        text = json.dumps(v, sort_keys=True, separators=(",", ":")) if not isinstance(v, str) else v
        lines.append(f"{CSV_COMMENT}{k}: {text}")
    return lines


def write_table(
    path: PathLike,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    meta: Dict[str, Any],
    fmt: str = "csv",
) -> Path:
    """Write rows under `columns`; the suffix of `path` is replaced by the format's."""
    if fmt not in ("csv", "json"):
        raise ContractError(f"unknown table format {fmt!r}")
    out = Path(path).with_suffix(f".{fmt}")
    out.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with out.open("w", encoding="utf-8", newline="") as fh:
            for line in _meta_lines(meta):
                fh.write(line + "\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_csv_text(v) for v in row])
    else:
        doc = {
            "metadata": meta,
            "columns": list(columns),
            "rows": [{c: _cell(v) for c, v in zip(columns, row)} for row in rows],
        }
        with out.open("w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return out


@dataclass
class TableData:
    """A table read back from disk (cells as strings for CSV, native for JSON)."""

    meta: Dict[str, Any]
    columns: Tuple[str, ...]
    rows: List[Dict[str, Any]] = field(default_factory=list)


def read_table(path: PathLike) -> TableData:
    """Read a table written by `write_table`."""
    p = Path(path)
    text = p.read_text(encoding="utf-8")
    if p.suffix == ".json":
        doc = json.loads(text)
        return TableData(meta=doc.get("metadata", {}), columns=tuple(doc["columns"]), rows=list(doc["rows"]))
    meta: Dict[str, Any] = {}
    body: List[str] = []
    for i, line in enumerate(text.splitlines()):
        if line.startswith(CSV_COMMENT):
            content = line[len(CSV_COMMENT):]
            if i == 0 and " " in content and ":" not in content:
                meta["artifact"], meta["version"] = content.split(" ", 1)
                continue
            key, _, value = content.partition(": ")
            try:
                meta[key] = json.loads(value)
            except json.JSONDecodeError:
                meta[key] = value
        else:
            body.append(line)
    reader = csv.reader(io.StringIO("\n".join(body)))
    header = next(reader, None)
    if header is None:
        raise ContractError(f"{p}: table has no header row")
    rows = [dict(zip(header, r)) for r in reader]
    return TableData(meta=meta, columns=tuple(header), rows=rows)


def write_meta_sidecar(binary_path: PathLike, meta: Dict[str, Any]) -> Path:
    """Metadata for a binary file, stored next to it as <name>.meta.json."""
    p = Path(binary_path)
    out = p.with_name(p.name + SIDECAR_SUFFIX)
    with out.open("w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def write_pddt_table(t: PartialDDT, path: PathLike, meta: Dict[str, Any], fmt: str = "csv") -> Path:
    """Export a table with hexadecimal a/b/c and signed log2p."""
    n = t.word_size
    rows = ((hex_word(e.a, n), hex_word(e.b, n), hex_word(e.c, n), e.log2p) for e in t)
    return write_table(path, PDDT_CSV_COLUMNS, rows, meta, fmt)


def trail_rows(trail: Trail, n: int = 16) -> List[Tuple[Any, ...]]:
    """Rows of a trail table plus the `total` trailer row."""
    rows: List[Tuple[Any, ...]] = [
        (r.round, hex_word(r.state.dL, n), hex_word(r.state.dR, n), -r.weight) for r in trail.rows
    ]
    rows.append(("total", "", "", trail.log2p))
    return rows


def write_trail(trail: Trail, path: PathLike, meta: Dict[str, Any], fmt: str = "csv", n: int = 16) -> Path:
    return write_table(path, TRAIL_COLUMNS, trail_rows(trail, n), meta, fmt)


def format_aligned(columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Plain-text table with left-aligned, space-padded columns."""
    cells = [list(map(str, columns))] + [[_csv_text(v) for v in r] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    lines = []
    for k, row in enumerate(cells):
        lines.append("  ".join(v.ljust(widths[i]) for i, v in enumerate(row)).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_text_report(path: PathLike, text: str, meta: Dict[str, Any]) -> Path:
    """Plain-text report under the same ``# `` metadata header as the CSV tables."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    header = "".join(line + "\n" for line in _meta_lines(meta))
    out.write_text(header + text, encoding="utf-8")
    return out


# ---------------------------------------------------------------------------
# SVG figures
# ---------------------------------------------------------------------------


def _save_svg(fig: Any, path: PathLike, meta: Optional[Dict[str, Any]] = None) -> Path:
    """Write `fig`; `meta` goes into the SVG <metadata> block as compact JSON."""
    out = Path(path).with_suffix(".svg")
    out.parent.mkdir(parents=True, exist_ok=True)
    svg_meta: Dict[str, Any] = {"Date": None}
    if meta:
        svg_meta["Description"] = json.dumps(meta, sort_keys=True, separators=(",", ":"))
    fig.savefig(out, format="svg", metadata=svg_meta)
    plt.close(fig)
    return out


def plot_histogram(
    bins: Sequence[HistogramBin],
    path: PathLike,
    title: str,
    xlabel: str = "Hamming weight",
    meta: Optional[Dict[str, Any]] = None,
) -> Path:
    """Bar chart of a histogram."""
    fig, ax = plt.subplots(figsize=(6, 4))
    if bins:
        lefts = [b.lo for b in bins]
        widths = [b.hi - b.lo for b in bins]
        ax.bar(lefts, [b.count for b in bins], width=widths, align="edge", color="#4c72b0", edgecolor="black", linewidth=0.4)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("Frequency")
    fig.tight_layout()
    return _save_svg(fig, path, meta)


def plot_boxplot(
    summaries: Sequence[BoxplotStats],
    path: PathLike,
    title: str = "Differential Hamming weights",
    meta: Optional[Dict[str, Any]] = None,
) -> Path:
    """Boxplots drawn from precomputed summaries."""
    fig, ax = plt.subplots(figsize=(6, 4))
    stats = [
        {
            "label": s.label,
            "med": s.median,
            "q1": s.q1,
            "q3": s.q3,
            "whislo": s.whisker_lo,
            "whishi": s.whisker_hi,
            "fliers": list(s.outliers),
            "mean": s.mean,
        }
        for s in summaries
    ]
    if stats:
        ax.bxp(stats, showfliers=True)
    ax.set_title(title)
    ax.set_ylabel("Hamming weight")
    fig.tight_layout()
    return _save_svg(fig, path, meta)


def plot_heatmap(
    grid: HeatmapGrid,
    path: PathLike,
    title: str = "Mean Hamming weight by input difference",
    meta: Optional[Dict[str, Any]] = None,
) -> Path:
    """Colour-ramp image of the mean-hw grid (empty cells left blank)."""
    fig, ax = plt.subplots(figsize=(6, 5))
    data = np.ma.masked_invalid(grid.mean_hw)
    im = ax.imshow(data, origin="lower", cmap="viridis", interpolation="nearest")
    fig.colorbar(im, ax=ax, label="mean HW")
    ax.set_title(title)
    ax.set_xlabel(f"b // {grid.bin_width}")
    ax.set_ylabel(f"a // {grid.bin_width}")
    fig.tight_layout()
    return _save_svg(fig, path, meta)


def write_heatmap_netcdf(grid: HeatmapGrid, path: PathLike, meta: Dict[str, Any]) -> Path:
    """Store the heatmap grid as NetCDF with the metadata in global attributes."""
    if not HAVE_XARRAY:
        raise ConfigError("output.heatmap_netcdf needs xarray; install it or set heatmap_netcdf to false")
    out = Path(path).with_suffix(".nc")
    out.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = grid.count.shape
    ds = xr.Dataset(
        {
            "count": xr.DataArray(grid.count.astype(np.int64), dims=("row", "col"), attrs={"long_name": "differentials per cell"}),
            "mean_hw": xr.DataArray(grid.mean_hw.astype(np.float64), dims=("row", "col"), attrs={"long_name": "mean Hamming weight"}),
        },
        coords={
            "row": xr.DataArray(np.arange(rows, dtype=np.int32) * grid.bin_width, dims=("row",), attrs={"long_name": "a bin start"}),
            "col": xr.DataArray(np.arange(cols, dtype=np.int32) * grid.bin_width, dims=("col",), attrs={"long_name": "b bin start"}),
        },
    )
    ds.attrs["source"] = ARTIFACT
    ds.attrs["version"] = __version__
    ds.attrs["simon32lab_metadata_json"] = json.dumps(meta, separators=(",", ":"), sort_keys=True)
    ds.to_netcdf(out)
    return out
