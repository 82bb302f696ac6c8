"""Command-line interface, exercised in process through cli.main."""

import json
from pathlib import Path

import numpy as np
import pytest

from cavmag.cli import main
from cavmag.dataio import read_spectrum_csv

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"

YIG_MATERIAL = {"gamma": 1.76e-2, "four_pi_m": 1750.0}


def small_doc(**extra):
    doc = {
        "version": 1,
        "modes": [
            {"label": "cpw", "alpha": 0.01, "beta": 0.02, "omega": 29.2},
            {"label": "yig", "alpha": 0.005, "beta": 0.004, "material": dict(YIG_MATERIAL)},
        ],
        "couplings": [{"pair": ["cpw", "yig"], "g": 0.25}],
        "field_grid": {"start": 800.0, "stop": 1200.0, "count": 21},
        "freq_grid": {"start": 28.4, "stop": 30.0, "count": 33},
    }
    doc.update(extra)
    return doc


@pytest.fixture
def small_config(tmp_path):
    path = tmp_path / "run.config"
    path.write_text(json.dumps(small_doc()), encoding="utf-8")
    return path


# ── kittel ─────────────────────────────────────────────────────────────


def test_kittel_stdout_and_csv(tmp_path, small_config, capsys):
    out = tmp_path / "kittel.csv"
    rc = main(["kittel", "--config", str(small_config), "--fields", "1000",
               "--out", str(out)])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "label h_oe omega"
    assert lines[1] == "yig 1000 29.18629815512752"
    assert out.read_text(encoding="utf-8").splitlines() == [
        "label,h_oe,omega",
        "yig,1000,29.18629815512752",
    ]


def test_kittel_freq_scale_rescales_stdout_only(tmp_path, small_config, capsys):
    out = tmp_path / "kittel.csv"
    rc = main(["kittel", "--config", str(small_config), "--fields", "1000",
               "--out", str(out), "--freq-scale", "0.5"])
    assert rc == 0
    shown = float(capsys.readouterr().out.splitlines()[1].split()[2])
    stored = float(out.read_text(encoding="utf-8").splitlines()[1].split(",")[2])
    assert shown == 0.5 * stored  # files always keep model units


def test_kittel_unknown_material(small_config, capsys):
    rc = main(["kittel", "--config", str(small_config), "--material", "iron"])
    assert rc == 2
    assert "'iron'" in capsys.readouterr().err


# ── map / branches ─────────────────────────────────────────────────────


def test_map_writes_csv_and_heatmap(tmp_path, small_config):
    out = tmp_path / "map.csv"
    rc = main(["map", "--config", str(small_config), "--out", str(out), "--heatmap"])
    assert rc == 0
    spectrum = read_spectrum_csv(out)
    assert spectrum.values.shape == (21, 33)
    pgm = out.with_suffix(".pgm")
    assert pgm.read_bytes().startswith(b"P5\n21 33\n255\n")


def test_branches_row_count(tmp_path, small_config):
    out = tmp_path / "branches.csv"
    rc = main(["branches", "--config", str(small_config), "--out", str(out)])
    assert rc == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1 + 21 * 2  # header + fields x branches


# ── synth ──────────────────────────────────────────────────────────────


def test_synth_is_deterministic_and_seed_overrides(tmp_path):
    config = tmp_path / "run.config"
    config.write_text(json.dumps(small_doc(noise={"sigma": 0.01, "seed": 5})),
                      encoding="utf-8")
    a, b, c = (tmp_path / name for name in ("a.csv", "b.csv", "c.csv"))
    assert main(["synth", "--config", str(config), "--out", str(a)]) == 0
    assert main(["synth", "--config", str(config), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert main(["synth", "--config", str(config), "--out", str(c), "--seed", "6"]) == 0
    assert a.read_bytes() != c.read_bytes()


def test_synth_without_noise_equals_map(tmp_path, small_config):
    synth_out = tmp_path / "synth.csv"
    map_out = tmp_path / "map.csv"
    assert main(["synth", "--config", str(small_config), "--out", str(synth_out)]) == 0
    assert main(["map", "--config", str(small_config), "--out", str(map_out)]) == 0
    assert synth_out.read_bytes() == map_out.read_bytes()


def test_synth_rejects_bad_seed(tmp_path, small_config, capsys):
    out = tmp_path / "x.csv"
    rc = main(["synth", "--config", str(small_config), "--out", str(out),
               "--seed", "-3"])
    assert rc == 2
    assert "seed" in capsys.readouterr().err


# ── fit ────────────────────────────────────────────────────────────────


def test_fit_self_data_no_free_parameters(tmp_path, capsys):
    config = tmp_path / "run.config"
    config.write_text(json.dumps(small_doc(fit={"method": "map", "free": []})),
                      encoding="utf-8")
    data = tmp_path / "data.csv"
    assert main(["map", "--config", str(config), "--out", str(data)]) == 0
    report = tmp_path / "report.txt"
    rc = main(["fit", "--config", str(config), "--data", str(data),
               "--out", str(report)])
    assert rc == 0
    text = report.read_text(encoding="utf-8")
    assert "converged: true" in text
    assert "residual: 0" in text.splitlines()[2]


def test_fit_recovers_coupling_via_cli(tmp_path, capsys):
    fit_block = {
        "method": "map",
        "free": [{"name": "g:cpw:yig", "lower": 0.05, "upper": 0.6, "initial": 0.15}],
    }
    config = tmp_path / "run.config"
    config.write_text(json.dumps(small_doc(fit=fit_block)), encoding="utf-8")
    data = tmp_path / "data.csv"
    assert main(["map", "--config", str(config), "--out", str(data)]) == 0
    rc = main(["fit", "--config", str(config), "--data", str(data)])
    assert rc == 0
    report = capsys.readouterr().out
    line = next(ln for ln in report.splitlines() if ln.startswith("parameter: g:cpw:yig"))
    value = float(line.split()[3])
    assert abs(value - 0.25) / 0.25 < 1e-4


def test_fit_missing_row_exits_5(tmp_path, capsys):
    config = tmp_path / "run.config"
    config.write_text(json.dumps(small_doc(fit={"method": "map", "free": []})),
                      encoding="utf-8")
    data = tmp_path / "data.csv"
    assert main(["map", "--config", str(config), "--out", str(data)]) == 0
    lines = data.read_text(encoding="utf-8").splitlines()
    del lines[5]
    data.write_text("\n".join(lines) + "\n", encoding="utf-8")
    rc = main(["fit", "--config", str(config), "--data", str(data)])
    assert rc == 5
    assert "incomplete grid" in capsys.readouterr().err


def test_fit_without_fit_block_exits_2(tmp_path, small_config, capsys):
    data = tmp_path / "data.csv"
    assert main(["map", "--config", str(small_config), "--out", str(data)]) == 0
    rc = main(["fit", "--config", str(small_config), "--data", str(data)])
    assert rc == 2
    assert "fit" in capsys.readouterr().err


# ── thickness ──────────────────────────────────────────────────────────


def test_thickness_single_row_and_maps_dir(tmp_path, capsys):
    doc = small_doc(thickness={
        "slope": 0.002, "intercept": 0.1, "t_min": 5.0, "t_max": 100.0,
        "thicknesses": [20.0],
        "crosslink": {"slope": 0.5, "intercept": 0.1},
        "varied": "yig",
    })
    config = tmp_path / "run.config"
    config.write_text(json.dumps(doc), encoding="utf-8")
    out = tmp_path / "thickness.csv"
    maps_dir = tmp_path / "maps"
    rc = main(["thickness", "--config", str(config), "--out", str(out),
               "--maps-dir", str(maps_dir)])
    assert rc == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    t, g1, g2, gap_p1, gap_p2 = (float(v) for v in lines[1].split(","))
    assert (t, g1, gap_p1) == (20.0, 0.0, 0.0)  # no linked magnon in a 2-mode run
    assert g2 == 0.002 * 20.0 + 0.1
    assert abs(gap_p2 - 2.0 * g2) / (2.0 * g2) < 0.02
    assert (maps_dir / "map_t20.csv").exists()
    # trend fits need two rows, so a one-point series prints none
    assert "g2_of_t" not in capsys.readouterr().out


# ── exit codes ─────────────────────────────────────────────────────────


def test_missing_config_exits_3(tmp_path, capsys):
    rc = main(["map", "--config", str(tmp_path / "nope.config"),
               "--out", str(tmp_path / "out.csv")])
    assert rc == 3
    assert "io error" in capsys.readouterr().err


def test_malformed_config_exits_2(tmp_path, capsys):
    config = tmp_path / "bad.config"
    config.write_text("{not json", encoding="utf-8")
    rc = main(["map", "--config", str(config), "--out", str(tmp_path / "out.csv")])
    assert rc == 2
    assert "config error" in capsys.readouterr().err


def test_shipped_configs_drive_map(tmp_path):
    rc = main(["map", "--config", str(CONFIG_DIR / "yig_only.config"),
               "--out", str(tmp_path / "yig.csv")])
    assert rc == 0


def test_shipped_thickness_config_prints_trends(tmp_path, capsys):
    rc = main(["thickness", "--config", str(CONFIG_DIR / "thickness.config"),
               "--out", str(tmp_path / "thick.csv")])
    assert rc == 0
    out = capsys.readouterr().out
    trend = next(ln for ln in out.splitlines() if ln.startswith("g2_of_t:"))
    crosslink = next(ln for ln in out.splitlines() if ln.startswith("g1_of_g2:"))
    assert float(trend.split()[-1]) > 0.999      # r_squared of the gap trend
    assert float(crosslink.split()[-1]) > 0.999
