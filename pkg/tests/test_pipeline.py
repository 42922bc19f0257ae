# -*- coding: utf-8 -*-
import logging

import pytest

import main
from simon32lab.config import default_config
from simon32lab.errors import EXIT_CONFIG, EXIT_EMPTY, EXIT_FORMAT, EXIT_OK, EmptyResultError
from simon32lab.io_reports import read_table, write_table
from simon32lab.pddt import load_pddt
from simon32lab.pipeline import (
    StageContext,
    cmd_experiment,
    cmd_pddt_build,
    cmd_run_all,
    cmd_sort,
    cmd_trails,
    cmd_validate,
    random_low_weight_differences,
    read_promising,
)
from simon32lab.schema import HEATMAP_COLUMNS, PROMISING_COLUMNS


def _cfg(out, word_size=8, workers=1, **extra):
    cfg = {
        "cipher": {"word_size": word_size},
        "experiment": {"trials": 2, "rounds": 6, "histogram_bins": 8},
        "extract": {"rounds": 6},
        "trails": {"rounds": 12},
        "validate": {"differentials": 4, "trials": 256},
        "output": {"dir": str(out)},
        "compute": {"shared_memory": {"enabled": workers > 1, "workers": workers, "min_items_per_worker": 1, "chunk_size": 64}},
        "seed": 5,
    }
    for section, values in extra.items():
        cfg.setdefault(section, {}).update(values)
    return cfg


def _ctx(out, **kw):
    return StageContext.from_config(_cfg(out, **kw))


def _tree(root):
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_pddt_build_and_sort(tmp_path):
    ctx = _ctx(tmp_path)
    table = cmd_pddt_build(ctx)
    assert (tmp_path / "pddt.bin").exists()
    assert (tmp_path / "pddt.bin.meta.json").exists()
    assert len(read_table(tmp_path / "pddt.csv").rows) == len(table)
    sig, non, sample = cmd_sort(ctx)
    assert len(sig) + len(non) == len(table)
    assert set(sig.weights.tolist()) <= {0, 1}
    assert load_pddt(tmp_path / "non_significant_sample.bin") == sample
    assert 0 < len(sample) <= len(non)


def test_pddt_build_threshold_above_one(tmp_path):
    ctx = _ctx(tmp_path, pddt={"threshold": 2.0})
    assert len(cmd_pddt_build(ctx)) == 0
    sig, non, sample = cmd_sort(ctx)
    assert len(sig) == len(non) == len(sample) == 0


def test_reloaded_pddt_keeps_threshold(tmp_path):
    ctx = _ctx(tmp_path, word_size=4, pddt={"threshold": 0.3, "compare": "gt"})
    table = cmd_pddt_build(ctx)
    loaded = load_pddt(tmp_path / "pddt.bin")
    assert loaded == table
    assert (loaded.threshold, loaded.compare) == (0.3, "gt")
    cmd_sort(ctx)
    assert load_pddt(tmp_path / "significant.bin").threshold == 0.3


def test_run_all_outputs(tmp_path, capsys):
    ctx = _ctx(tmp_path)
    result = cmd_run_all(ctx)
    for name in (
        "significant.bin", "non_significant.bin", "non_significant_sample.bin",
        "hw_significant.csv", "hw_non_significant.csv",
        "histogram_significant.csv", "histogram_significant.svg",
        "histogram_non_significant.csv", "boxplot.csv", "boxplot.svg",
        "ttest.csv", "summary.csv", "promising.csv", "trail_report.csv",
        "best_trail.csv", "comparison.csv", "comparison.txt",
    ):
        assert (tmp_path / name).exists(), name
    promising = read_promising(tmp_path / "promising.csv")
    report = read_table(tmp_path / "trail_report.csv")
    assert len(report.rows) == len(promising) == result["trails"]["promising"]
    assert len(list((tmp_path / "trails").glob("trail_*.csv"))) == len(promising)
    assert read_table(tmp_path / "best_trail.csv").rows[-1]["round"] == "total"
    comparison = (tmp_path / "comparison.txt").read_text(encoding="utf-8")
    assert comparison.startswith("# simon32lab ")
    assert "# config: " in comparison
    assert "this workbench" in comparison
    assert b"<dc:description>" in (tmp_path / "boxplot.svg").read_bytes()
    assert "pDDT:" in capsys.readouterr().out


def test_heatmap_only_for_16_bit_words(tmp_path, caplog):
    ctx = _ctx(tmp_path)
    cmd_pddt_build(ctx)
    cmd_sort(ctx)
    with caplog.at_level(logging.WARNING, logger="simon32lab"):
        cmd_experiment(ctx)
    assert not (tmp_path / "heatmap.csv").exists()
    assert "Heatmap skipped" in caplog.text


@pytest.mark.slow
def test_heatmap_at_16_bits(tmp_path):
    ctx = _ctx(tmp_path, word_size=16, pddt={"threshold": 0.5}, sort={"sig_threshold": 1.0})
    cmd_pddt_build(ctx)
    cmd_sort(ctx)
    cmd_experiment(ctx)
    heat = read_table(tmp_path / "heatmap.csv")
    assert heat.columns == HEATMAP_COLUMNS
    assert len(heat.rows) == 4096


def test_run_all_is_byte_identical_across_workers(tmp_path):
    cmd_run_all(_ctx(tmp_path / "a", workers=1))
    cmd_run_all(_ctx(tmp_path / "b", workers=4))
    a, b = _tree(tmp_path / "a"), _tree(tmp_path / "b")
    assert a.keys() == b.keys()
    for name in a:
        assert a[name] == b[name], name


def test_json_format(tmp_path):
    ctx = _ctx(tmp_path, output={"format": "json", "svg": False})
    cmd_run_all(ctx)
    assert (tmp_path / "trail_report.json").exists()
    assert not (tmp_path / "boxplot.svg").exists()


def test_degenerate_ttest_is_reported(tmp_path):
    # Paper mode with a single trial: the significant set may be tiny but must not crash.
    ctx = _ctx(tmp_path, pddt={"threshold": 1.0}, experiment={"hw_mode": "paper", "trials": 1})
    cmd_pddt_build(ctx)
    cmd_sort(ctx)
    cmd_experiment(ctx)
    tt = read_table(tmp_path / "ttest.csv")
    assert tt.columns == ("t", "p", "df")
    assert "error" in tt.meta or len(tt.rows) == 1


def test_empty_promising_set(tmp_path):
    ctx = _ctx(tmp_path)
    path = write_table(tmp_path / "given", PROMISING_COLUMNS, [], {"artifact": "simon32lab"})
    with pytest.raises(EmptyResultError):
        cmd_trails(ctx, promising_path=path)
    assert read_table(tmp_path / "trail_report.csv").rows == []


def test_trails_from_existing_promising_file(tmp_path):
    ctx = _ctx(tmp_path, word_size=16, trails={"rounds": 20})
    path = write_table(tmp_path / "given", PROMISING_COLUMNS, [("0x8000", "0x8000", "0x0000", 0, 17)], {"artifact": "simon32lab"})
    out = cmd_trails(ctx, promising_path=path)
    assert out["best"].trail.total_weight == 32
    assert out["best"].verdict == "boundary"
    ref = read_table(tmp_path / "reference_trail.csv")
    assert ref.rows[0]["dL"] == "0xa000"
    assert ref.rows[-1]["log2p"] == "-32"


def test_default_extraction_finds_reference_set(tmp_path):
    ctx = _ctx(tmp_path, word_size=16, pddt={"threshold": 0.5}, extract={"rounds": 10}, trails={"rounds": 20})
    cmd_pddt_build(ctx)
    cmd_sort(ctx)
    out = cmd_trails(ctx)
    promising = read_promising(tmp_path / "promising.csv")
    assert out["promising"] == len(promising) == 33
    assert all(p.triple.c == 0 for p in promising)
    assert out["best"].trail.log2p == -32
    assert out["best"].verdict == "boundary"
    ref = read_table(tmp_path / "reference_trail.csv")
    assert ref.rows[-1]["log2p"] == "-32"


def test_validate(tmp_path):
    ctx = _ctx(tmp_path, word_size=16, validate={"differentials": 50, "trials": 1024})
    out = cmd_validate(ctx)
    table = read_table(tmp_path / "montecarlo.csv")
    assert len(table.rows) == out["rows"] == 50
    assert table.meta["target"] == "and_zero"
    assert out["reachable"] == 50
    assert all(float(r["exact"]) > 0 for r in table.rows)
    assert any(0 < float(r["estimate"]) < 1 for r in table.rows)
    assert out["within_3sigma"] >= 45


def test_validate_model_target(tmp_path):
    ctx = _ctx(tmp_path, word_size=16, validate={"target": "model"})
    out = cmd_validate(ctx)
    table = read_table(tmp_path / "montecarlo.csv")
    assert table.meta["target"] == "model"
    assert out["rows"] == 4
    assert out["within_3sigma"] == 4


def test_random_low_weight_differences():
    diffs = random_low_weight_differences(10, 16, seed=1)
    weights = [bin(d.dL).count("1") + bin(d.dR).count("1") for d in diffs]
    assert weights == [1, 2] * 5
    assert diffs == random_low_weight_differences(10, 16, seed=1)


def test_main_exit_codes(tmp_path):
    out = str(tmp_path)
    assert main.run(["pddt-build", "--word-size", "4", "--out", out, "--log-level", "WARNING"]) == EXIT_OK
    assert main.run(["sort", "--word-size", "40", "--out", out]) == EXIT_CONFIG
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"garbage!")
    assert main.run(["sort", "--pddt", str(bad), "--out", out]) == EXIT_FORMAT
    empty = write_table(tmp_path / "none", PROMISING_COLUMNS, [], {"artifact": "simon32lab"})
    assert main.run(["trails", "--promising", str(empty), "--out", out]) == EXIT_EMPTY


def test_cli_overrides():
    from simon32lab.cli import parse_args

    args = parse_args(["experiment", "--trials", "3", "--hw-mode", "paper", "--workers", "2", "--seed", "9"])
    cfg = main.build_config(args)
    assert cfg["experiment"]["trials"] == 3
    assert cfg["experiment"]["hw_mode"] == "paper"
    assert cfg["seed"] == 9
    assert cfg["compute"]["shared_memory"]["workers"] == 2
    # Unset flags keep the defaults.
    assert cfg["pddt"]["threshold"] == 0.1


@pytest.mark.slow
def test_default_experiment_separates_the_sets(tmp_path):
    cfg = default_config()
    cfg["output"].update(dir=str(tmp_path), svg=False)
    ctx = StageContext.from_config(cfg)
    assert ctx.run.trials == 4
    cmd_pddt_build(ctx)
    cmd_sort(ctx)
    stats = cmd_experiment(ctx)
    assert stats["t"] < -10
    assert stats["p"] < 0.05


def test_main_imports_nothing_before_numpy_check(monkeypatch):
    import importlib.util
    import subprocess
    import sys
    from pathlib import Path

    root = Path(main.__file__).resolve().parent
    code = "import sys, main; print(any(m.startswith('simon32lab') for m in sys.modules))"
    out = subprocess.run([sys.executable, "-c", code], cwd=root, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
    assert not hasattr(main, "deep_update")

    real = importlib.util.find_spec
    monkeypatch.setattr(importlib.util, "find_spec", lambda name, *a, **k: None if name == "numpy" else real(name, *a, **k))
    with pytest.raises(ModuleNotFoundError, match="NumPy is required"):
        main.run(["validate"])
