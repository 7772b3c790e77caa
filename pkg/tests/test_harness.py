"""Sweep orchestration, report emission, and the command line front end."""

import json
import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from strato import fieldio
from strato.cli import build_parser, main
from strato.grid import GridSpec, ScalarField, lp_norm
from strato.harness import (
    RateRow,
    SweepConfig,
    emit_report,
    field_distance,
    run_single,
    run_sweep,
    velocity_distance,
)
from strato.initdata import DensitySpec, PatchSpec
from conftest import random_field


def tiny_config_dict(out_dir="results", mus=(1.0e-3, 3.0e-3, 1.0e-2)):
    return {
        "grid": {"n": 64, "half_length": 8.0},
        "patch": {"kind": "disc", "center": [0.0, 0.0], "radius": 1.0},
        "density": {"kind": "gaussian", "amplitude": 0.1, "width": 1.0, "center": [0.0, 0.5]},
        "params": {"dt": 0.05, "t_final": 0.2, "kappa": 1.0},
        "sweep": {"mu": list(mus), "sample_times": [0.1, 0.2], "error_p": 2.0},
        "output": {"dir": str(out_dir), "save_fields": False},
    }


@pytest.fixture(scope="module")
def tiny_sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    config = SweepConfig.from_dict(tiny_config_dict(out_dir=out))
    return config, run_sweep(config)


class TestSweepConfig:
    def test_from_dict_defaults(self):
        raw = {
            "grid": {"n": 32},
            "patch": {"kind": "disc"},
            "params": {"dt": 0.1, "t_final": 1.0},
            "sweep": {"mu": [0.01]},
        }
        cfg = SweepConfig.from_dict(raw)
        assert cfg.grid == GridSpec(n=32, half_length=8.0)
        assert cfg.density is None
        assert cfg.sample_times == (1.0,)
        assert cfg.error_p == 2.0
        assert cfg.kappa == 1.0
        assert cfg.output_dir == "results"
        assert cfg.save_fields is False

    def test_dict_round_trip(self):
        cfg = SweepConfig.from_dict(tiny_config_dict())
        assert SweepConfig.from_dict(cfg.to_dict()) == cfg

    def test_json_round_trip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(tiny_config_dict()))
        cfg = SweepConfig.from_json(path)
        assert cfg.mu_values == (1.0e-3, 3.0e-3, 1.0e-2)
        assert cfg.density == DensitySpec(kind="gaussian", amplitude=0.1, width=1.0, center=(0.0, 0.5))

    def test_digest_is_stable_and_sensitive(self):
        a = SweepConfig.from_dict(tiny_config_dict())
        b = SweepConfig.from_dict(tiny_config_dict())
        assert a.digest() == b.digest()
        assert len(a.digest()) == 64
        c = SweepConfig.from_dict(tiny_config_dict(mus=(1.0e-3, 1.0e-2)))
        assert c.digest() != a.digest()

    def test_mu_ladder_validation(self):
        base = tiny_config_dict()
        for bad in ([], [0.0], [-1.0e-3], [1.0e-3, 1.0e-3]):
            raw = dict(base)
            raw["sweep"] = dict(base["sweep"], mu=bad)
            with pytest.raises(ValueError):
                SweepConfig.from_dict(raw)

    def test_error_p_validation(self):
        raw = tiny_config_dict()
        raw["sweep"]["error_p"] = 0.5
        with pytest.raises(ValueError, match="error_p"):
            SweepConfig.from_dict(raw)


class TestDistances:
    def test_field_distance_constants(self, grid64):
        a = ScalarField(grid64, np.full((64, 64), 3.0))
        b = ScalarField(grid64, np.full((64, 64), 1.0))
        box = 2.0 * grid64.half_length
        assert abs(field_distance(a, b, 2.0) - 2.0 * box) <= 1e-12 * box
        assert field_distance(a, b, np.inf) == 2.0

    def test_field_distance_grid_mismatch(self, grid64, grid128):
        a = ScalarField(grid64, np.zeros((64, 64)))
        b = ScalarField(grid128, np.zeros((128, 128)))
        with pytest.raises(ValueError, match="different grids"):
            field_distance(a, b)

    def test_velocity_distance_single_mode(self, grid64):
        x1, x2 = grid64.mesh
        k = np.pi / 2.0
        omega = ScalarField.from_values(grid64, np.sin(k * x1) + 0.0 * x2)
        zero = ScalarField(grid64, np.zeros((64, 64)))
        got = velocity_distance(omega, zero, 2.0)
        want = np.sqrt(2.0) * grid64.half_length * 2.0 / (2.0 * k)
        assert abs(got - want) <= 1e-12 * want

    def test_velocity_distance_symmetric(self, grid64):
        a = random_field(grid64, 41, band=4.0)
        b = random_field(grid64, 42, band=4.0)
        assert velocity_distance(a, b, 2.0) == velocity_distance(b, a, 2.0)


class TestRunSweep:
    def test_single_rung_output_shape(self):
        cfg = SweepConfig.from_dict(tiny_config_dict())
        mu, times, omegas, rhos = run_single(cfg, 0.0)
        assert mu == 0.0
        assert np.allclose(times, [0.1, 0.2])
        assert len(omegas) == len(rhos) == 2
        assert omegas[0].shape == (64, 64)

    def test_rows_sorted_and_consistent(self, tiny_sweep):
        cfg, result = tiny_sweep
        keys = [(r.time, r.mu) for r in result.rows]
        assert keys == sorted(keys)
        assert len(result.rows) == len(cfg.mu_values) * len(cfg.sample_times)
        for r in result.rows:
            assert r.discrepancy == r.velocity_error + r.density_error
            assert r.vorticity_error > 0.0

    def test_errors_increase_with_diffusivity(self, tiny_sweep):
        _, result = tiny_sweep
        for t in (0.1, 0.2):
            sub = [r for r in result.rows if r.time == t]
            for small, large in zip(sub, sub[1:]):
                assert small.mu < large.mu
                assert small.velocity_error < large.velocity_error
                assert small.vorticity_error < large.vorticity_error

    def test_slopes_reported_per_time(self, tiny_sweep):
        cfg, result = tiny_sweep
        assert set(result.slopes) == {"0.1", "0.2"}
        for entry in result.slopes.values():
            assert entry["mu"] == sorted(cfg.mu_values)
            assert "discrepancy_slope" in entry
            assert "vorticity_slope" in entry
            assert 0.0 < entry["vorticity_slope"] < 2.0

    def test_short_ladder_has_no_slope(self, tmp_path):
        raw = tiny_config_dict(out_dir=tmp_path, mus=(1.0e-3, 1.0e-2))
        raw["sweep"]["sample_times"] = [0.2]
        result = run_sweep(SweepConfig.from_dict(raw))
        (entry,) = result.slopes.values()
        assert "discrepancy_slope" not in entry

    def test_save_fields_round_trip(self, tmp_path):
        raw = tiny_config_dict(out_dir=tmp_path, mus=(1.0e-2,))
        raw["sweep"]["sample_times"] = [0.2]
        raw["output"]["save_fields"] = True
        cfg = SweepConfig.from_dict(raw)
        result = run_sweep(cfg)
        assert set(result.fields) == {0.0, 1.0e-2}
        emit_report(result)
        assert len(sorted(tmp_path.glob("omega_mu*.slf"))) == 2
        back = fieldio.read_snapshot(tmp_path / "omega_mu0_t0.2.slf")
        times, omegas, _ = result.fields[0.0]
        assert np.array_equal(back.values, omegas[0])


class TestEmitReport:
    def test_files_and_headers(self, tiny_sweep, tmp_path):
        _, result = tiny_sweep
        paths = emit_report(result, tmp_path)
        assert set(paths) == {"rates", "slopes", "manifest"}
        lines = paths["rates"].read_text().splitlines()
        assert lines[0] == "mu,time,velocity_error,density_error,discrepancy,vorticity_error"
        assert len(lines) == 1 + len(result.rows)
        assert "np.float64" not in paths["rates"].read_text()

    def test_rates_parse_back_exactly(self, tiny_sweep, tmp_path):
        _, result = tiny_sweep
        paths = emit_report(result, tmp_path)
        lines = paths["rates"].read_text().splitlines()[1:]
        for line, row in zip(lines, result.rows):
            vals = [float(tok) for tok in line.split(",")]
            assert vals == [
                row.mu, row.time, row.velocity_error, row.density_error,
                row.discrepancy, row.vorticity_error,
            ]

    def test_slopes_json_round_trip(self, tiny_sweep, tmp_path):
        _, result = tiny_sweep
        paths = emit_report(result, tmp_path)
        assert json.loads(paths["slopes"].read_text()) == result.slopes

    def test_manifest_contents(self, tiny_sweep, tmp_path):
        cfg, result = tiny_sweep
        paths = emit_report(result, tmp_path)
        manifest = json.loads(paths["manifest"].read_text())
        assert manifest["config"] == json.loads(json.dumps(cfg.to_dict()))
        assert manifest["config_sha256"] == cfg.digest()
        assert manifest["rows"] == len(result.rows)
        assert manifest["mu_ladder"] == sorted(cfg.mu_values)

    def test_default_directory_from_config(self, tiny_sweep):
        cfg, result = tiny_sweep
        paths = emit_report(result)
        assert paths["rates"].parent == Path(cfg.output_dir)
        assert paths["rates"].exists()


class TestDeterminism:
    def test_worker_count_does_not_change_bytes(self, tmp_path, monkeypatch):
        raw = tiny_config_dict(out_dir=tmp_path, mus=(1.0e-3, 1.0e-2))
        cfg = SweepConfig.from_dict(raw)
        monkeypatch.setenv("STRATO_WORKERS", "1")
        serial = emit_report(run_sweep(cfg), tmp_path / "serial")
        monkeypatch.setenv("STRATO_WORKERS", "2")
        pooled = emit_report(run_sweep(cfg), tmp_path / "pooled")
        assert serial["rates"].read_bytes() == pooled["rates"].read_bytes()
        assert serial["slopes"].read_bytes() == pooled["slopes"].read_bytes()


class TestCli:
    def test_parser_requires_subcommand(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_console_script_installed(self):
        assert shutil.which("strato") is not None
        proc = subprocess.run(
            [sys.executable, "-m", "strato.cli", "--help"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert "sweep" in proc.stdout and "rankine" in proc.stdout

    def test_fit_exact_power_law(self, tmp_path, capsys):
        path = tmp_path / "rates.csv"
        xs = np.geomspace(1.0e-3, 1.0, 8)
        with open(path, "w") as fh:
            fh.write("mu,discrepancy\n")
            for x in xs:
                fh.write(f"{float(x)!r},{float(2.0 * x ** 0.75)!r}\n")
        rc = main(["fit", str(path), "--group", "", "--reference", "0.75"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "slope 0.75000" in out
        assert "[2, 2]" in out

    def test_fit_grouped_short_ladder(self, tmp_path, capsys):
        path = tmp_path / "rates.csv"
        with open(path, "w") as fh:
            fh.write("mu,time,discrepancy\n")
            for t, theta in (("0.1", 0.5), ("0.2", 1.0)):
                for x in np.geomspace(1.0e-2, 1.0, 4):
                    fh.write(f"{float(x)!r},{t},{float(x ** theta)!r}\n")
        rc = main(["fit", str(path)])
        out = capsys.readouterr().out
        assert rc == 0
        assert "time=0.1: slope 0.50000 (short ladder)" in out
        assert "time=0.2: slope 1.00000 (short ladder)" in out

    def test_fit_empty_table(self, tmp_path, capsys):
        path = tmp_path / "empty.csv"
        path.write_text("mu,discrepancy\n")
        assert main(["fit", str(path)]) == 1
        assert "no data rows" in capsys.readouterr().err

    def test_rankine_ladder_and_csv(self, tmp_path, capsys):
        path = tmp_path / "rankine.csv"
        rc = main([
            "rankine", "--p", "2", "--points", "6",
            "--tau-min", "1e-3", "--tau-max", "1e-1", "--csv", str(path),
        ])
        out = capsys.readouterr().out
        assert rc == 0
        assert "vorticity p=2" in out
        assert "(ref 0.25000)" in out
        lines = path.read_text().splitlines()
        assert lines[0] == "quantity,p,tau,error"
        assert len(lines) == 7
        assert "np.float64" not in path.read_text()
        errs = [float(line.split(",")[3]) for line in lines[1:]]
        assert all(a < b for a, b in zip(errs, errs[1:]))

    def test_sweep_command(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_config_dict(out_dir=tmp_path / "unused")))
        rc = main(["sweep", str(cfg_path), "--out", str(tmp_path / "out")])
        out = capsys.readouterr().out
        assert rc == 0
        assert "discrepancy slope" in out
        assert (tmp_path / "out" / "rates.csv").exists()
        assert (tmp_path / "out" / "slopes.json").exists()
        assert (tmp_path / "out" / "manifest.json").exists()

    def test_simulate_command(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(tiny_config_dict()))
        rc = main([
            "simulate", str(cfg_path), "--mu", "1e-3",
            "--out", str(tmp_path / "sim"), "--snapshots",
        ])
        out = capsys.readouterr().out
        assert rc == 0
        assert "steps to t=0.2" in out
        diag = (tmp_path / "sim" / "diagnostics.csv").read_text().splitlines()
        assert diag[0].startswith("times,omega_l2,omega_sup")
        assert len(sorted((tmp_path / "sim").glob("omega_t*.slf"))) == 2
        assert len(sorted((tmp_path / "sim").glob("rho_t*.slf"))) == 2

    def test_besov_command_matches_direct_norm(self, tmp_path, capsys, grid64):
        from strato.littlewood_paley import BesovParams, DyadicPartition, besov_norm

        f = random_field(grid64, 51, band=6.0)
        snap = tmp_path / "field.slf"
        fieldio.write_snapshot(f, snap)
        rc = main(["besov", str(snap), "-s", "0.5"])
        out = capsys.readouterr().out
        assert rc == 0
        want = besov_norm(f, BesovParams(s=0.5), DyadicPartition(grid64))
        assert f"besov norm (s=0.5, p=inf, r=inf): {want:.6e}" in out

    def test_conormal_command(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        csv_path = tmp_path / "series.csv"
        cfg_path.write_text(json.dumps(tiny_config_dict()))
        rc = main([
            "conormal", str(cfg_path), "--mu", "1e-3", "--t", "0.1",
            "--samples", "3", "--csv", str(csv_path),
        ])
        out = capsys.readouterr().out
        assert rc == 0
        assert "family floor" in out
        assert "conormal vorticity norm" in out
        assert "log-estimate ratio" in out
        lines = csv_path.read_text().splitlines()
        assert lines[0] == ("t,family_floor,gradv_sup_integral,conormal_norm,"
                            "holder_quotient,log_estimate_ratio")
        table = np.array([[float(tok) for tok in line.split(",")] for line in lines[1:]])
        assert table.shape == (3, 6)
        assert np.allclose(table[:, 0], [0.0, 0.05, 0.1])
        assert table[0, 2] == 0.0
        assert np.all(np.diff(table[:, 2]) > 0.0)
        assert np.all(table[:, 1] > 0.0)
        assert np.all(np.isfinite(table))
