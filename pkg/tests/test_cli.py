import json

import pytest

from boolflow.cli import EXIT_DIVERGED, EXIT_OK, EXIT_USAGE, main
from boolflow.harness import ExperimentConfig


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.json"
    rc = main(["generate", "--n", "3", "--d", "4", "--seed", "7", "--out", str(path)])
    assert rc == EXIT_OK
    return path


class TestGenerate:
    def test_deterministic_bytes(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            assert main(["generate", "--n", "4", "--d", "3", "--seed", "9", "--out", str(path)]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_bad_spec_is_usage_error(self, tmp_path):
        rc = main(
            ["generate", "--n", "2", "--d", "2", "--coeff-lo", "0", "--coeff-hi", "0",
             "--out", str(tmp_path / "x.json")]
        )
        assert rc == EXIT_USAGE


class TestSolve:
    def test_solve_writes_report_and_trajectory(self, instance_file, tmp_path):
        report = tmp_path / "report.json"
        traj = tmp_path / "traj.csv"
        rc = main(
            ["solve", "--in", str(instance_file), "--scheme", "houbolt",
             "--out", str(report), "--dump-traj", str(traj)]
        )
        assert rc == EXIT_OK
        data = json.loads(report.read_text())
        assert data["status"] == "Converged"
        assert len(data["u"]) == 3
        assert set(data["rounded"]) <= {-1, 1}
        lines = traj.read_text().splitlines()
        assert lines[0].startswith("k,t,tau,residual,u_0")
        assert len(lines) - 1 == data["iterations"] + 1

    def test_multistart_solve(self, instance_file, tmp_path):
        rc = main(
            ["solve", "--in", str(instance_file), "--scheme", "lie",
             "--starts", "3", "--seed", "1", "--out", str(tmp_path / "r.json")]
        )
        assert rc == EXIT_OK

    def test_diverged_exit_code(self, instance_file):
        rc = main(["solve", "--in", str(instance_file), "--scheme", "houbolt", "--c", "1e9"])
        assert rc == EXIT_DIVERGED

    def test_missing_required_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc_info:
            main(["solve"])
        assert exc_info.value.code == EXIT_USAGE


class TestOracle:
    def test_json_output(self, instance_file, capsys):
        rc = main(["oracle", "--in", str(instance_file), "--json"])
        assert rc == EXIT_OK
        data = json.loads(capsys.readouterr().out)
        assert data["size"] == 8
        assert set(data["u_star"]) <= {-1, 1}

    def test_guard(self, tmp_path):
        path = tmp_path / "big.json"
        main(["generate", "--n", "6", "--d", "2", "--seed", "1", "--out", str(path)])
        assert main(["oracle", "--in", str(path), "--max-n", "4"]) == EXIT_USAGE


class TestSweepAndTable:
    def test_sweep_then_table(self, tmp_path, capsys):
        cfg = ExperimentConfig(
            grid=((2, 4),), schemes=("houbolt", "lie"), eps_list=(1e-4,),
            master_seed=3, sparsity=1.0, record_timing=False,
        )
        cfg_path = tmp_path / "cfg.json"
        cfg.save(cfg_path)
        log = tmp_path / "log.jsonl"
        assert main(["sweep", "--config", str(cfg_path), "--out", str(log)]) == EXIT_OK
        assert len(log.read_text().splitlines()) == 2

        table = tmp_path / "t.csv"
        assert main(["table", "--log", str(log), "--layout", "table1", "--out", str(table)]) == EXIT_OK
        lines = table.read_text().splitlines()
        assert lines[0] == "# boolflow table layout=table1 format=1"
        assert lines[1].startswith("n,d,houbolt_obj")

    def test_axis_sweep_with_summary(self, tmp_path):
        cfg = ExperimentConfig(
            grid=((2, 4),), schemes=("houbolt",), eps_list=(1e-4,),
            master_seed=3, sparsity=1.0, record_timing=False,
        )
        cfg_path = tmp_path / "cfg.json"
        cfg.save(cfg_path)
        log, summary = tmp_path / "log.jsonl", tmp_path / "summary.json"
        rc = main(
            ["sweep", "--config", str(cfg_path), "--axis", "epsilon",
             "--values", "1e-4,1e-5", "--out", str(log), "--summary", str(summary)]
        )
        assert rc == EXIT_OK
        data = json.loads(summary.read_text())
        assert data["axis"] == "epsilon"
        assert data["median_delta_decreasing"] is True

    def test_axis_requires_values(self, tmp_path):
        cfg_path = tmp_path / "cfg.json"
        ExperimentConfig(grid=((2, 4),), record_timing=False).save(cfg_path)
        rc = main(
            ["sweep", "--config", str(cfg_path), "--axis", "c", "--out", str(tmp_path / "l.jsonl")]
        )
        assert rc == EXIT_USAGE


class TestTraj:
    def test_traj_roundtrip(self, instance_file, tmp_path):
        out = tmp_path / "traj.csv"
        rc = main(["traj", "--in", str(instance_file), "--scheme", "lie", "--out", str(out)])
        assert rc == EXIT_OK
        assert out.read_text().splitlines()[0].startswith("k,t,tau,residual")
