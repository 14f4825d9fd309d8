import json

import pytest

from swiptsec import cli
from swiptsec.conic import NUMERICAL_FAILURE
from swiptsec.harness import SWEEP_FIELDS, ExperimentConfig, InstanceResult
from swiptsec.outer import OuterResult

FAST = ["--grid-coarse", "8", "--grid-refine", "4", "--n-rand", "20"]


def write_cfg(tmp_path, **kw):
    doc = {"params": {"p_total": "30 dBm", "e_bar_s": "0 dBm", "e_bar_e": "0 dBm"}, **kw}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return str(path)


def test_solve_ok_with_json(tmp_path, capsys):
    out = tmp_path / "res.json"
    assert cli.main(["solve", "--config", write_cfg(tmp_path), "--seed", "1", "--out", str(out)] + FAST) == 0
    text = capsys.readouterr().out
    assert "rate SDR+GR" in text and "recovery report" in text
    doc = json.loads(out.read_text())
    assert doc["result"]["status"] == "optimal" and doc["config"]["seed"] == 1


def test_solve_infeasible(tmp_path):
    cfg = write_cfg(tmp_path, params={"e_bar_s": "40 dBm"})
    assert cli.main(["solve", "--config", cfg] + FAST) == cli.EXIT_INFEASIBLE


def test_solve_numerical_failure(monkeypatch):
    def broken(*a, **k):
        return InstanceResult(NUMERICAL_FAILURE, OuterResult(None, 0.0, None, status=NUMERICAL_FAILURE))

    monkeypatch.setattr(cli, "solve_instance", broken)
    assert cli.main(["solve"]) == cli.EXIT_NUMERICAL


@pytest.mark.parametrize("argv", [
    ["solve", "--config", "/nonexistent/cfg.json"],
    ["solve", "--grid-coarse", "3"],
    ["solve", "--n-rand", "0"],
    ["solve", "--eq22-noise", "maybe"],
    ["sweep-power", "--workers", "0"],
    ["frobnicate"],
    [],
])
def test_bad_configuration(argv):
    assert cli.main(argv) == cli.EXIT_CONFIG


def test_bad_config_content(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"params": {"n_users": -1}}')
    assert cli.main(["solve", "--config", str(p)]) == cli.EXIT_CONFIG
    p.write_text("not json")
    assert cli.main(["solve", "--config", str(p)]) == cli.EXIT_CONFIG


def test_sweep_variable_mismatch(tmp_path):
    cfg = write_cfg(tmp_path, sweep={"variable": "energy", "values": [0, 4]})
    assert cli.main(["sweep-power", "--config", cfg]) == cli.EXIT_CONFIG


def test_sweep_energy_csv(tmp_path, capsys):
    cfg = write_cfg(tmp_path, sweep={"variable": "energy", "values": [0, 6]}, n_channel_draws=2)
    out = tmp_path / "e.csv"
    assert cli.main(["sweep-energy", "--config", cfg, "--out", str(out)] + FAST) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_FIELDS) and len(lines) == 3
    assert (tmp_path / "e.csv.meta.json").exists()
    first = out.read_text()
    assert cli.main(["sweep-energy", "--config", cfg, "--out", str(out), "--workers", "2"] + FAST) == 0
    assert out.read_text() == first


def test_config_defaults_for_sweeps():
    args = cli._build_parser().parse_args(["sweep-energy", "--draws", "3"])
    cfg = cli._config(args, "energy", cli.ENERGY_SWEEP)
    assert isinstance(cfg, ExperimentConfig)
    assert cfg.sweep_variable == "energy" and cfg.sweep_values == cli.ENERGY_SWEEP and cfg.n_channel_draws == 3


def test_oracle_check_runs(capsys):
    # the default instance cannot meet its energy thresholds: both sides are 0
    assert cli.main(["oracle-check", "--draws", "2"]) == 0
    assert capsys.readouterr().out.count(" ok") == 2


def test_oracle_check_rejects_large_instance(tmp_path):
    assert cli.main(["oracle-check", "--config", write_cfg(tmp_path)]) == cli.EXIT_CONFIG


def test_selftest(capsys):
    assert cli.main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("[PASS]") == 6


def test_version(capsys):
    assert cli.main(["--version"]) == 0
