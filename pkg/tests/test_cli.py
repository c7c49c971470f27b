"""End-to-end checks of the command-line entry points."""

import json

import numpy as np
import pytest

from shuttleqec import cli, noise, sampler


def run(capsys, *argv):
    rc = cli.main(list(argv))
    captured = capsys.readouterr()
    stream = captured.out if rc == 0 else captured.err
    return rc, json.loads(stream)


class TestInfoCommands:
    def test_code_info(self, capsys):
        rc, out = run(capsys, "code-info", "rsc-d3")
        assert rc == 0
        assert (out["n"], out["k"]) == (9, 1)
        assert out["d_estimate"] == 3
        assert max(out["x_check_weights"]) <= 4

    def test_code_info_unknown(self, capsys):
        with pytest.raises(SystemExit):
            cli.main(["code-info"])
        capsys.readouterr()

    def test_layout_plan(self, capsys):
        rc, out = run(capsys, "layout-plan", "rsc-d3")
        assert rc == 0
        assert out["n_shuttles"] > 0
        assert out["total_distance"] > 0


class TestSimulate:
    def test_requires_seed(self, capsys):
        rc, out = run(capsys, "simulate", "--code", "rsc-d3",
                      "--shots", "10")
        assert rc == 2
        assert "seed" in out["error"]

    def test_deterministic_and_worker_independent(self, capsys, monkeypatch):
        argv = ["simulate", "--code", "rsc-d3", "--shots", "400",
                "--seed", "7", "--noise-p", "0.004"]
        rc1, out1 = run(capsys, *argv)
        monkeypatch.setenv("SHUTTLEQEC_WORKERS", "4")
        rc2, out2 = run(capsys, *argv)
        assert rc1 == rc2 == 0
        assert out1["failures"] == out2["failures"]
        assert out1["p_L"] == out2["p_L"]

    def test_config_file_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({"code": "rsc-d3", "shots": 50,
                                   "seed": 3, "noise": {"p": 0.002}}))
        rc, out = run(capsys, "simulate", "--config", str(cfg),
                      "--shots", "80")
        assert rc == 0
        assert out["shots"] == 80

    def test_unknown_config_key_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "exp.json"
        cfg.write_text(json.dumps({"code": "rsc-d3", "seed": 1,
                                   "bogus": 1}))
        rc, out = run(capsys, "simulate", "--config", str(cfg))
        assert rc == 2
        assert "bogus" in out["error"]

    def test_qldpc_code_runs(self, capsys):
        rc, out = run(capsys, "simulate", "--code", "gb-a2",
                      "--shots", "5", "--rounds", "2", "--seed", "5")
        assert rc == 0
        assert out["decoder"] == "bposd"


class TestSynth:
    def test_writes_circuit(self, capsys, tmp_path):
        path = tmp_path / "c.txt"
        rc, out = run(capsys, "synth", "--code", "rsc-d3", "--rounds", "2",
                      "--output", str(path))
        assert rc == 0
        text = path.read_text()
        assert "SHUTTLE" in text and "MEAS_Z" in text


class TestPipeline:
    def test_sweep_fit_resources_chain(self, capsys, tmp_path):
        curve = tmp_path / "curve.csv"
        rc, _ = run(capsys, "sweep", "--code", "rsc-d3", "--shots", "300",
                    "--seed", "9", "--axis", "p",
                    "--values", "0.004,0.006,0.008,0.010,0.012",
                    "--output", str(curve))
        assert rc == 0
        header = curve.read_text().splitlines()[0]
        assert header == "d,p,T2_star,p_log,ci_low,ci_high"

        # single-d sweep cannot support the fit; check the error path
        rc, out = run(capsys, "fit", str(curve))
        assert rc == 2

        # hand the resources command a synthetic fit instead
        fit_json = tmp_path / "fit.json"
        fit_json.write_text(json.dumps(
            {"A": 1.0, "alpha": 0.05, "beta": 1e-4, "gamma": 0.5,
             "delta": 0.0}))
        rc, out = run(capsys, "resources", "hubbard-6x6",
                      "--fit", str(fit_json))
        assert rc == 0
        assert out["patches"] == 288

    def test_resources_nisq_no_fit(self, capsys):
        rc, out = run(capsys, "resources", "nisq-beating")
        assert rc == 0
        assert out["patches"] == 130

    def test_resources_hubbard_without_fit_errors(self, capsys):
        rc, out = run(capsys, "resources", "hubbard-6x6")
        assert rc == 2


class TestDecode:
    def test_decode_batch(self, capsys, tmp_path):
        from shuttleqec import circuits
        np_ = noise.NoiseParams(p=0.003, T2_star=20e-6)
        c = noise.annotate(circuits.synth_surface_cycle(3, rounds=3), np_)
        dem = sampler.build_dem(c)
        batch = sampler.sample(dem, 40, seed=21)
        dem_path = tmp_path / "model.dem"
        dem_path.write_text(dem.to_text())
        batch_path = tmp_path / "batch.bin"
        batch.save(batch_path)

        rc, out = run(capsys, "decode", str(dem_path), str(batch_path))
        assert rc == 0
        assert out["shots"] == 40
        assert len(out["predictions"]) == 40

        rc2, out2 = run(capsys, "decode", str(dem_path), str(batch_path),
                        "--decoder", "bposd")
        assert rc2 == 0
        assert out2["shots"] == 40

    def test_missing_file(self, capsys):
        rc, out = run(capsys, "decode", "/nonexistent.dem",
                      "/nonexistent.bin")
        assert rc == 2
