# -*- coding: utf-8 -*-
"""Configuration handling for simon32lab.

The workbench is configured via:
1) The built-in defaults below.
2) An optional JSON configuration file (--config).
3) Optional CLI overrides (handled in cli.py / main.py).
"""

from __future__ import annotations

# Import JSON for reading configuration files.
import json

# Import os for the output-directory environment variable.
import os

# Import dataclass helpers for the validated run configuration.
from dataclasses import asdict, dataclass

# Import typing primitives.
from typing import Any, Dict, Tuple

# Import local helpers.
from .errors import ConfigError
from .pddt import STRATA

# Environment variable supplying the default output directory.
OUT_DIR_ENV = "SIMON32LAB_OUT"

HW_MODES = ("paper", "empirical", "unkeyed")
OUTPUT_FORMATS = ("csv", "json")
VALIDATE_TARGETS = ("and_zero", "model")


def default_config() -> Dict[str, Any]:
    """Return a complete default configuration dictionary."""
    return {
        "cipher": {
            "word_size": 16,
            # null: (1, 8, 2) at n=16, (1, n//2, 2) for reduced SIMON-like words.
            "rotations": None,
        },
        "pddt": {
            "threshold": 0.1,
            # "ge": keep 2^-w >= threshold, "gt": keep 2^-w > threshold.
            "compare": "ge",
            "export_csv": True,
        },
        "sort": {
            "sig_threshold": 0.5,
            "sample_percent": 10,
            "stratum": "hw_c",
        },
        "experiment": {
            "rounds": 10,
            "trials": 4,
            "hw_mode": "empirical",
            "histogram_bins": 32,
            "p_method": "auto",
        },
        "extract": {
            "hw_mode": "paper",
            "rounds": 10,
            "trials": 1,
            "hw_threshold": 0,
            "selection": "zero_output",
            "exclude_trivial": True,
        },
        "trails": {
            "rounds": 20,
            "block_bits": 32,
            "cycle_max_steps": 65536,
        },
        "validate": {
            "differentials": 50,
            "trials": 4096,
            "rounds": 1,
            # and_zero: the transition with a zero AND difference; model: the deterministic prediction.
            "target": "and_zero",
        },
        "output": {
            "dir": os.environ.get(OUT_DIR_ENV) or "simon32lab_out",
            "format": "csv",
            "svg": True,
            "heatmap_netcdf": False,
        },
        "compute": {
            "mpi": {
                "enabled": None,  # auto-enable only when launched under MPI
            },
            "shared_memory": {
                "enabled": None,
                "workers": None,
                "min_items_per_worker": 64,
                "chunk_size": 4096,
            },
        },
        "seed": 2025,
    }


def load_json(path: str) -> Dict[str, Any]:
    """Load a JSON file into a Python dictionary."""
    # Open the file with UTF-8 encoding.
    with open(path, "r", encoding="utf-8") as f:
        # Parse JSON into Python dict.
        data = json.load(f)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: configuration must be a JSON object")
    return data


def deep_update(base: Dict[str, Any], other: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge dict `other` into dict `base` (non-destructive)."""
    # Start from a shallow copy of base.
    out = dict(base)
    # Iterate keys from other.
    for k, v in other.items():
        # If both sides are dicts, merge recursively.
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = deep_update(out[k], v)  # type: ignore[arg-type]
        else:
            # Otherwise override.
            out[k] = v
    # Return merged dictionary.
    return out


def _choice(value: Any, allowed: Tuple[str, ...], name: str) -> str:
    v = str(value).lower().strip()
    if v not in allowed:
        raise ConfigError(f"{name} must be one of {allowed}, got {value!r}")
    return v


def _int_in(value: Any, lo: int, hi: int | None, name: str) -> int:
    try:
        v = int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be an integer, got {value!r}") from exc
    if v < lo or (hi is not None and v > hi):
        raise ConfigError(f"{name}={v} outside [{lo}, {hi if hi is not None else 'inf'}]")
    return v


def _positive_float(value: Any, name: str) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a number, got {value!r}") from exc
    if not v > 0.0:
        raise ConfigError(f"{name} must be > 0, got {v}")
    return v


@dataclass(frozen=True)
class RunConfig:
    """Validated pipeline settings; `to_dict` is embedded in every output file."""

    word_size: int
    rotations: Tuple[int, int, int]
    pddt_threshold: float
    pddt_compare: str
    sig_threshold: float
    sample_percent: float
    stratum: str
    rounds_experiment: int
    trials: int
    hw_mode: str
    histogram_bins: int
    p_method: str
    extract_hw_mode: str
    extract_rounds: int
    extract_trials: int
    extract_hw_threshold: int
    extract_selection: str
    exclude_trivial: bool
    rounds_trail: int
    block_bits: int
    cycle_max_steps: int
    validate_differentials: int
    validate_trials: int
    validate_rounds: int
    validate_target: str
    seed: int
    output_dir: str
    format: str
    export_csv: bool
    svg: bool
    heatmap_netcdf: bool

    @classmethod
    def from_dict(cls, cfg: Dict[str, Any]) -> "RunConfig":
        """Build and validate from a merged configuration dictionary."""
        c = deep_update(default_config(), cfg)
        n = _int_in(c["cipher"]["word_size"], 4, 16, "cipher.word_size")
        raw_rots = c["cipher"]["rotations"]
        if raw_rots is None:
            raw_rots = (1, 8, 2) if n == 16 else (1, n // 2, 2)
        rots = tuple(_int_in(r, 0, n - 1, "cipher.rotations") for r in raw_rots)
        if len(rots) != 3:
            raise ConfigError("cipher.rotations must list exactly three amounts")
        sample_percent = _positive_float(c["sort"]["sample_percent"], "sort.sample_percent")
        if sample_percent > 100:
            raise ConfigError(f"sort.sample_percent must be <= 100, got {sample_percent}")
        return cls(
            word_size=n,
            rotations=rots,  # type: ignore[arg-type]
            pddt_threshold=_positive_float(c["pddt"]["threshold"], "pddt.threshold"),
            pddt_compare=_choice(c["pddt"]["compare"], ("ge", "gt"), "pddt.compare"),
            sig_threshold=_positive_float(c["sort"]["sig_threshold"], "sort.sig_threshold"),
            sample_percent=sample_percent,
            stratum=_choice(c["sort"]["stratum"], tuple(STRATA), "sort.stratum"),
            rounds_experiment=_int_in(c["experiment"]["rounds"], 1, 32, "experiment.rounds"),
            trials=_int_in(c["experiment"]["trials"], 1, None, "experiment.trials"),
            hw_mode=_choice(c["experiment"]["hw_mode"], HW_MODES, "experiment.hw_mode"),
            histogram_bins=_int_in(c["experiment"]["histogram_bins"], 1, None, "experiment.histogram_bins"),
            p_method=_choice(c["experiment"]["p_method"], ("auto", "t", "normal"), "experiment.p_method"),
            extract_hw_mode=_choice(c["extract"]["hw_mode"], HW_MODES, "extract.hw_mode"),
            extract_rounds=_int_in(c["extract"]["rounds"], 1, 32, "extract.rounds"),
            extract_trials=_int_in(c["extract"]["trials"], 1, None, "extract.trials"),
            extract_hw_threshold=_int_in(c["extract"]["hw_threshold"], 0, None, "extract.hw_threshold"),
            extract_selection=_choice(c["extract"]["selection"], ("zero_output", "exact", "near_zero"), "extract.selection"),
            exclude_trivial=bool(c["extract"]["exclude_trivial"]),
            rounds_trail=_int_in(c["trails"]["rounds"], 1, None, "trails.rounds"),
            block_bits=_int_in(c["trails"]["block_bits"], 1, None, "trails.block_bits"),
            cycle_max_steps=_int_in(c["trails"]["cycle_max_steps"], 1, None, "trails.cycle_max_steps"),
            validate_differentials=_int_in(c["validate"]["differentials"], 1, None, "validate.differentials"),
            validate_trials=_int_in(c["validate"]["trials"], 1, None, "validate.trials"),
            validate_rounds=_int_in(c["validate"]["rounds"], 1, 32, "validate.rounds"),
            validate_target=_choice(c["validate"]["target"], VALIDATE_TARGETS, "validate.target"),
            seed=_int_in(c["seed"], 0, None, "seed"),
            output_dir=str(c["output"]["dir"]),
            format=_choice(c["output"]["format"], OUTPUT_FORMATS, "output.format"),
            export_csv=bool(c["pddt"]["export_csv"]),
            svg=bool(c["output"]["svg"]),
            heatmap_netcdf=bool(c["output"]["heatmap_netcdf"]),
        )

    def to_dict(self) -> Dict[str, Any]:
        """Metadata form: every result-determining field (paths and workers excluded)."""
        d = asdict(self)
        d.pop("output_dir")
        d["rotations"] = list(self.rotations)
        return d
