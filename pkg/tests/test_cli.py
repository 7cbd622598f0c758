import json
import os

import numpy as np
import pytest

from clawquad import cli
from clawquad import kinematics as kin

SCENARIO = os.path.join(os.path.dirname(cli.__file__), "data", "scenarios",
                        "dual_leg.jsonl")


def run(argv):
    return cli.main(argv)


class TestPlanCommand:
    def test_basic_plan_with_verify(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        assert run(["plan", "0", "2", "-o", str(out), "--verify"]) == 0
        stdout = capsys.readouterr().out
        assert "type=neither" in stdout
        assert "duration=1.766811" in stdout
        header = out.read_text().splitlines()[0]
        assert header == "t_s,position_rad,pulse_us"

    def test_zero_displacement_single_row(self, tmp_path):
        out = tmp_path / "z.csv"
        assert run(["plan", "0.5", "0.5", "-o", str(out)]) == 0
        assert len(out.read_text().strip().splitlines()) == 2

    def test_paper_limits_are_defaults(self, tmp_path):
        bare = tmp_path / "bare.csv"
        explicit = tmp_path / "explicit.csv"
        run(["plan", "0", "2", "-o", str(bare)])
        run(["plan", "0", "2", "-o", str(explicit),
             "--jmax", "15", "--amax", "15", "--vmax", "5.2"])
        assert bare.read_bytes() == explicit.read_bytes()

    def test_flags_override_defaults(self, tmp_path, capsys):
        out = tmp_path / "f.csv"
        run(["plan", "0", "2", "-o", str(out), "--vmax", "1.0"])
        assert "type=vel_only" in capsys.readouterr().out

    def test_config_overrides_flags(self, tmp_path, capsys):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"vmax": 1.0}))
        out = tmp_path / "c.csv"
        run(["plan", "0", "2", "-o", str(out), "--vmax", "5.2",
             "--config", str(config)])
        assert "type=vel_only" in capsys.readouterr().out

    def test_env_overrides_config(self, tmp_path, capsys, monkeypatch):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"vmax": 5.2}))
        monkeypatch.setenv("CLAWQUAD_VMAX", "1.0")
        out = tmp_path / "e.csv"
        run(["plan", "0", "2", "-o", str(out), "--config", str(config)])
        assert "type=vel_only" in capsys.readouterr().out

    def test_usage_error_exits_2(self):
        with pytest.raises(SystemExit) as err:
            run(["plan", "zero", "1"])
        assert err.value.code == 2

    def test_plot_writes_figure(self, tmp_path):
        out = tmp_path / "p.csv"
        fig = tmp_path / "p.png"
        assert run(["plan", "0", "1", "-o", str(out), "--plot", str(fig)]) == 0
        assert fig.stat().st_size > 0


class TestSyncCommand:
    def test_multi_joint_csv(self, tmp_path, capsys):
        targets = tmp_path / "targets.json"
        targets.write_text(json.dumps({"start": [0, 0], "target": [0.5, 2.0]}))
        out = tmp_path / "s.csv"
        assert run(["sync", str(targets), "-o", str(out), "--verify"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t_s,q0_rad,q1_rad"
        last = [float(v) for v in lines[-1].split(",")]
        assert last[1] == pytest.approx(0.5, abs=1e-3)
        assert last[2] == pytest.approx(2.0, abs=1e-3)

    def test_single_joint_behaves_like_plan(self, tmp_path):
        targets = tmp_path / "one.json"
        targets.write_text(json.dumps({"target": [2.0]}))
        out_sync = tmp_path / "one.csv"
        assert run(["sync", str(targets), "-o", str(out_sync)]) == 0
        out_plan = tmp_path / "plan.csv"
        assert run(["plan", "0", "2", "-o", str(out_plan)]) == 0
        sync_rows = [l.split(",")[:2] for l in out_sync.read_text().splitlines()[1:]]
        plan_rows = [l.split(",")[:2] for l in out_plan.read_text().splitlines()[1:]]
        assert sync_rows == plan_rows

    def test_bad_targets_file_exits_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run(["sync", str(bad)]) == 2


class TestReportCommand:
    def test_default_model_passes(self, capsys):
        assert run(["report"]) == 0
        out = capsys.readouterr().out
        assert "1481.6" in out
        assert "58.2%" in out

    def test_violated_identity_exits_1(self, tmp_path, capsys):
        model = tmp_path / "bad.model"
        model.write_text(kin.format_model(kin.DEFAULT_MODEL).replace(
            "total_mass_g = 1481.6", "total_mass_g = 1490"))
        assert run(["report", "--model", str(model)]) == 1

    def test_unreadable_model_exits_2(self, tmp_path):
        assert run(["report", "--model", str(tmp_path / "missing.model")]) == 2

    def test_figures_directory(self, tmp_path):
        figdir = tmp_path / "figs"
        assert run(["report", "--figures", str(figdir)]) == 0
        names = sorted(os.listdir(figdir))
        assert names == ["mass_budget.png", "moi_comparison.png", "report.csv"]
        rows = (figdir / "report.csv").read_text().splitlines()
        assert rows[0] == "property,value,unit"
        values = {r.split(",")[0]: r.split(",")[1] for r in rows[1:]}
        assert values["total_mass_declared"] == "1481.6"
        assert values["moi_increase_mean"] == "58.2"


class TestServeCommand:
    def test_headless_ticks_exact(self, capsys):
        assert run(["serve", "--headless", "--ticks", "250"]) == 0
        assert "250 ticks" in capsys.readouterr().out

    def test_bundled_scenario_reaches_dual_mode(self, capsys):
        assert run(["serve", "--scenario", SCENARIO]) == 0
        assert "final mode=dual_leg_manip" in capsys.readouterr().out

    def test_scenario_trace_determinism(self, tmp_path):
        t1, t2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        assert run(["serve", "--scenario", SCENARIO, "--trace", str(t1)]) == 0
        assert run(["serve", "--scenario", SCENARIO, "--trace", str(t2)]) == 0
        assert t1.read_bytes() == t2.read_bytes()

    def test_bad_scenario_exits_2(self, tmp_path):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{nope}\n")
        assert run(["serve", "--scenario", str(bad)]) == 2

    def test_bad_model_exits_2(self, tmp_path):
        missing = tmp_path / "nope.model"
        assert run(["serve", "--headless", "--ticks", "1",
                    "--model", str(missing)]) == 2
