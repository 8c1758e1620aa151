import json
import os

import numpy as np
import pytest

from dbmedge.cli import main as cli_main
from dbmedge.errors import ConfigError
from dbmedge.experiments import (RunConfig, parse_config_text, render_report,
                                 replay_manifest, run_experiment)


def edge_law_config(tmp_path, **kw):
    defaults = dict(experiment="edge-law", N=8, t=1.0, profile="point",
                    profile_param=0.0, outdir=str(tmp_path / "out"))
    defaults.update(kw)
    return RunConfig(**defaults)


class TestConfig:
    def test_parse_round_trip(self):
        text = """
        # comment line
        experiment = rigidity
        N = 123
        t = 0.5
        trials = 7
        omega_ell = 0.12
        outdir = somewhere
        """
        cfg = parse_config_text(text)
        assert cfg.experiment == "rigidity"
        assert cfg.N == 123 and cfg.t == 0.5 and cfg.trials == 7
        assert cfg.omega_ell == 0.12 and cfg.outdir == "somewhere"

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("nonsense = 2")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("N = pear")

    def test_hierarchy_validated(self):
        with pytest.raises(ConfigError):
            RunConfig(omega_1=0.5, omega_ell=0.2).validate()

    def test_unknown_experiment_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig(experiment="warp").validate()


class TestRunExperiment:
    def test_edge_law_point_mass(self, tmp_path):
        man = run_experiment(edge_law_config(tmp_path))
        assert man.complete and man.passed()
        rep = json.load(open(tmp_path / "out" / "edge_law.json"))
        assert abs(rep["per_trial"]["E_minus"] + 2.0) <= 1e-8
        assert abs(rep["per_trial"]["gamma0"] - 1.0) <= 1e-8

    def test_determinism_bitwise(self, tmp_path):
        m1 = run_experiment(edge_law_config(tmp_path / "a"))
        m2 = run_experiment(edge_law_config(tmp_path / "b"))
        assert m1.digests == m2.digests

    def test_seed_changes_outputs(self, tmp_path):
        cfg = dict(experiment="rigidity", N=60, t=1.0, trials=3,
                   profile="point", profile_param=0.0)
        m1 = run_experiment(RunConfig(outdir=str(tmp_path / "a"),
                                      master_seed=1, **cfg))
        m2 = run_experiment(RunConfig(outdir=str(tmp_path / "b"),
                                      master_seed=2, **cfg))
        assert m1.digests != m2.digests

    def test_worker_scheduling_independence(self, tmp_path):
        cfg = dict(experiment="rigidity", N=60, t=1.0, trials=6,
                   profile="point", profile_param=0.0)
        m1 = run_experiment(RunConfig(outdir=str(tmp_path / "w1"),
                                      workers=1, **cfg))
        m2 = run_experiment(RunConfig(outdir=str(tmp_path / "w2"),
                                      workers=2, **cfg))
        assert m1.digests == m2.digests

    def test_replay_manifest(self, tmp_path):
        m1 = run_experiment(edge_law_config(tmp_path / "a"))
        m2 = replay_manifest(str(tmp_path / "a" / "out" / "manifest.json"),
                             str(tmp_path / "b"))
        assert m1.digests == m2.digests

    def test_failed_run_leaves_incomplete_manifest(self, tmp_path):
        cfg = RunConfig(experiment="probe-finite-speed", N=50,
                        barrier_a=10, barrier_b=9999,
                        outdir=str(tmp_path / "bad"))
        with pytest.raises(ConfigError):
            run_experiment(cfg)
        man = json.load(open(tmp_path / "bad" / "manifest.json"))
        assert man["complete"] is False

    def test_simulate_trajectory_format(self, tmp_path):
        cfg = RunConfig(experiment="simulate", N=12, t=0.02,
                        outdir=str(tmp_path / "s"))
        man = run_experiment(cfg)
        assert man.verdicts["ordered"]
        lines = open(tmp_path / "s" / "trajectory.csv").read().splitlines()
        assert lines[0] == "step,time,index,position"
        step, time_, index, pos = lines[1].split(",")
        assert int(step) == 0 and int(index) == 1


class TestRenderReport:
    def test_edge_law_density_file(self, tmp_path):
        run_experiment(edge_law_config(tmp_path))
        files = render_report(str(tmp_path / "out"))
        names = {os.path.basename(f) for f in files}
        assert "density.dat" in names and "summary.txt" in names
        rows = [ln.split() for ln in
                open(tmp_path / "out" / "plotdata" / "density.dat").read().splitlines()[1:]]
        mass = np.trapezoid([float(r) for _, r in rows],
                            [float(e) for e, _ in rows])
        assert abs(mass - 1.0) < 1e-3

    def test_universality_ecdf_monotone(self, tmp_path):
        cfg = RunConfig(experiment="universality", N=60, trials=50,
                        outdir=str(tmp_path / "u"))
        run_experiment(cfg)
        render_report(str(tmp_path / "u"))
        rows = open(tmp_path / "u" / "plotdata" / "ecdf_main.dat").read().splitlines()[1:]
        heights = [float(r.split()[1]) for r in rows]
        assert all(b >= a for a, b in zip(heights, heights[1:]))

    def test_energy_decay_ci(self, tmp_path):
        cfg = RunConfig(experiment="probe-energy", N=150, omega_ell=0.10,
                        trials=3, outdir=str(tmp_path / "e"))
        run_experiment(cfg)
        render_report(str(tmp_path / "e"))
        line = open(tmp_path / "e" / "plotdata" / "decay_fit.dat").read()
        assert "slope" in line and "CI" in line


class TestCli:
    def test_cli_pass_exit_zero(self, tmp_path, capsys):
        cfg_file = tmp_path / "c.cfg"
        cfg_file.write_text("experiment = edge-law\nN = 8\nt = 1.0\n"
                            "profile = point\nprofile_param = 0.0\n")
        code = cli_main(["edge-law", "--config", str(cfg_file),
                         "--out", str(tmp_path / "o")])
        assert code == 0
        out = capsys.readouterr().out
        assert "slope_ok: pass" in out

    def test_cli_failed_verdict_exit_two(self, tmp_path):
        # tiny universality run cannot meet the KS threshold
        cfg_file = tmp_path / "c.cfg"
        cfg_file.write_text("experiment = universality\nN = 40\ntrials = 30\n")
        code = cli_main(["universality", "--config", str(cfg_file),
                         "--out", str(tmp_path / "o")])
        assert code == 2

    def test_cli_error_exit_one(self, tmp_path):
        code = cli_main(["probe-finite-speed", "--out", str(tmp_path / "o")])
        # default barrier_b=1000 exceeds default N=400
        assert code == 1

    def test_cli_env_outdir(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("DBM_EDGE_OUTDIR", str(tmp_path / "env_out"))
        cfg_file = tmp_path / "c.cfg"
        cfg_file.write_text("experiment = edge-law\nN = 8\nt = 1.0\n"
                            "profile = point\nprofile_param = 0.0\n")
        code = cli_main(["edge-law", "--config", str(cfg_file)])
        assert code == 0
        assert (tmp_path / "env_out" / "manifest.json").exists()

    def test_cli_seed_override(self, tmp_path):
        cfg_file = tmp_path / "c.cfg"
        cfg_file.write_text("experiment = rigidity\nN = 60\nt = 1.0\n"
                            "trials = 3\nprofile = point\nprofile_param = 0.0\n")
        cli_main(["rigidity", "--config", str(cfg_file), "--seed", "1",
                  "--out", str(tmp_path / "a")])
        cli_main(["rigidity", "--config", str(cfg_file), "--seed", "1",
                  "--out", str(tmp_path / "b")])
        cli_main(["rigidity", "--config", str(cfg_file), "--seed", "2",
                  "--out", str(tmp_path / "c")])
        da = json.load(open(tmp_path / "a" / "manifest.json"))["digests"]
        db = json.load(open(tmp_path / "b" / "manifest.json"))["digests"]
        dc = json.load(open(tmp_path / "c" / "manifest.json"))["digests"]
        assert da == db and da != dc
