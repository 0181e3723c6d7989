"""Config handling, the scenario pipeline and the command-line interface."""

import json

import numpy as np
import pytest

from oamlink import (default_config, run_experiment, run_scenario,
                     scenario_from_config, validate_config)
from oamlink.cli import main
from oamlink.errors import ChannelError, ConfigError, OamLinkError
from oamlink.scenario import (obstruction_from, ring_radius_for,
                              rx_positions_from, wavelength_from)


def _small_cfg(**over):
    cfg = {
        "grid": {"side": 128, "extent_m": 2.0},
        "healing": {"z_samples_m": [11.0, 50.0]},
    }
    for key, value in over.items():
        node = cfg.setdefault(key, {})
        if isinstance(value, dict):
            node.update(value)
        else:
            cfg[key] = value
    return validate_config(cfg)


def test_defaults_validate_and_merge():
    cfg = validate_config({})
    assert cfg == default_config()
    cfg = validate_config({"rx": {"snr_db": 12}})
    assert cfg["rx"]["snr_db"] == 12
    assert cfg["grid"]["side"] == 1024   # untouched default


def test_unknown_and_mistyped_fields():
    with pytest.raises(ConfigError):
        validate_config({"rx": {"snr": 12}})
    with pytest.raises(ConfigError):
        validate_config({"turbo": True})
    with pytest.raises(ConfigError):
        validate_config({"grid": {"side": "big"}})
    with pytest.raises(ConfigError):
        validate_config({"modes": []})
    with pytest.raises(ConfigError):
        validate_config({"obstruction": {"z_m": 60.0}})
    try:
        validate_config({"grid": {"side": "big"}})
    except ConfigError as e:
        assert "grid.side" in str(e)


def test_ring_radius_lookup_and_matching():
    cfg = validate_config({})
    assert ring_radius_for(cfg, 2) == 0.149
    assert ring_radius_for(cfg, 4) == 0.218
    # unlisted orders fall back to Bessel matching against the order-2 ring
    assert ring_radius_for(cfg, 3) == pytest.approx(
        0.149 * 4.20118894121 / 3.05423692823, rel=1e-9)
    with pytest.raises(ConfigError):
        ring_radius_for(cfg, 0)


def test_wavelength_and_geometry_helpers():
    cfg = validate_config({})
    assert wavelength_from(cfg) == pytest.approx(299792458.0 / 28e9, rel=1e-12)
    cfg2 = validate_config({"link": {"wavelength_override_m": 0.011}})
    assert wavelength_from(cfg2) == 0.011

    pos = rx_positions_from(cfg)
    assert pos.shape == (4, 2)
    assert np.allclose(pos[:, 0], [-0.21, -0.07, 0.07, 0.21])
    assert np.allclose(pos[:, 1], -50.0 * np.tan(np.radians(1.0)))

    mask = obstruction_from(cfg)
    assert mask.shape == "rectangle" and mask.z_position == 10.0
    cfg_off = validate_config({"obstruction": {"enabled": False}})
    assert obstruction_from(cfg_off) is None


def test_run_scenario_clear_small_grid():
    cfg = _small_cfg()
    s = scenario_from_config(cfg, 2, obstructed=False, h_scale=None)
    result = run_scenario(s, keep_fields=True)
    assert result.metrics.combined_evm_pct < 50.0
    assert set(result.fields) == {"source", "receiver_plane"}
    assert result.fields["receiver_plane"].z_position == pytest.approx(50.0)
    # auto-normalization: mean |h| of the snapshot is unity
    assert np.mean(np.abs(result.channel.h)) == pytest.approx(1.0, rel=1e-9)


def test_full_blockage_fails_in_rx_stage():
    cfg = _small_cfg(obstruction={"width_m": 10.0, "height_m": 10.0,
                                  "center_y_m": 0.0})
    s = scenario_from_config(cfg, 2, obstructed=True, h_scale=None)
    with pytest.raises(ChannelError) as err:
        run_scenario(s)
    assert str(err.value).startswith("[rx_chain]")


def test_experiment_without_obstruction_has_zero_deltas():
    cfg = _small_cfg(obstruction={"enabled": False})
    report = run_experiment(cfg)
    for l in ("2", "4"):
        data = report["modes"][l]
        assert data["d_power_db"] == pytest.approx(0.0, abs=1e-12)
        assert data["final_similarity"] == 1.0
        for run in data["noise_runs"]:
            assert run["d_snr_db"] == pytest.approx(0.0, abs=1e-12)


def test_experiment_report_structure_and_prediction():
    cfg = _small_cfg()
    report = run_experiment(cfg)
    assert report["tool"]["name"] == "oamlink"
    assert report["config"]["grid"]["side"] == 128
    assert report["link_plan"]["num_elements"] == 229
    assert set(report["modes"]) == {"2", "4"}
    curve = report["modes"]["2"]["healing_curve"]
    assert curve["z_m"] == [11.0, 50.0]
    pred = report["prediction"]
    # larger order carries the larger tangential wave vector
    assert pred["tangential_wavevector_rad_per_m"]["4"] \
        > pred["tangential_wavevector_rad_per_m"]["2"]
    assert pred["better_of_first_two"] == "4"
    assert pred["healing_order_most_to_least"][0] == "4"


def test_experiment_outputs_and_determinism(tmp_path):
    cfg = _small_cfg()
    a, b = tmp_path / "a", tmp_path / "b"
    run_experiment(cfg, out_dir=a)
    run_experiment(cfg, out_dir=b)
    for name in ("report.json", "healing_curve.csv", "correlations.csv"):
        assert (a / name).exists()
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    header = (a / "healing_curve.csv").read_text().splitlines()[0]
    assert header == "mode,z_m,similarity,mode_purity"


def test_cli_plan(tmp_path, capsys):
    rc = main(["plan", "--out", str(tmp_path)])
    assert rc == 0
    plan = json.loads((tmp_path / "plan.json").read_text())
    assert plan["max_beam_radius_m"] == pytest.approx(4.9152)
    assert plan["reference_comparison"]["num_elements"]["discrepancy"] is True


def test_cli_simulate_and_overrides(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "grid": {"side": 128, "extent_m": 2.0},
        "healing": {"z_samples_m": [11.0, 50.0]},
    }))
    out = tmp_path / "out"
    rc = main(["simulate", "--config", str(cfg_path), "--out", str(out),
               "--mode", "2", "--clear", "--snr-db", "25", "--dump-fields"])
    assert rc == 0
    summary = json.loads((out / "scenario.json").read_text())
    assert summary["scenario"] == "clear"
    assert (out / "source.oamf").exists()
    assert (out / "receiver_plane.csv").exists()


def test_cli_experiment_and_heal_curve(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "grid": {"side": 128, "extent_m": 2.0},
        "healing": {"z_samples_m": [11.0, 50.0]},
    }))
    out = tmp_path / "out"
    assert main(["experiment", "--config", str(cfg_path),
                 "--out", str(out)]) == 0
    assert (out / "report.json").exists()
    out2 = tmp_path / "out2"
    assert main(["heal-curve", "--config", str(cfg_path),
                 "--out", str(out2)]) == 0
    assert (out2 / "healing_curve.csv").exists()


def test_cli_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    rc = main(["experiment", "--config", str(bad), "--out", str(tmp_path)])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_cli_seed_and_grid_overrides(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "grid": {"extent_m": 2.0},
        "healing": {"z_samples_m": [11.0, 50.0]},
    }))
    out = tmp_path / "o1"
    rc = main(["experiment", "--config", str(cfg_path), "--out", str(out),
               "--grid", "128", "--seed", "99"])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["config"]["grid"]["side"] == 128
    assert report["config"]["rx"]["noise_seed"] == 99


def test_stage_labels_are_prefixed():
    # a ring that cannot fit the requested grid fails in the synthesis stage
    cfg = _small_cfg(ring_radii_m={"2": 10.0, "4": 0.218})
    s = scenario_from_config(cfg, 2, obstructed=False)
    with pytest.raises(OamLinkError) as err:
        run_scenario(s)
    assert str(err.value).startswith("[synthesis]")
