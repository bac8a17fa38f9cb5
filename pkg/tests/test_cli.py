import json

import pytest

from thermofield import cli
from thermofield.evolution import EvolutionConfig
from thermofield.experiment import ExperimentConfig
from thermofield.models import xxz


@pytest.fixture
def config_file(tmp_path):
    cfg = ExperimentConfig(xxz(6, 1.0), EvolutionConfig(2.0, dtau=0.1, beta_grid=[0.5, 1.0, 1.5]),
                           output_dir=str(tmp_path / "default_out"))
    path = tmp_path / "config.json"
    cfg.dump(path)
    return path


def test_run_analyze_report(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", str(config_file), "--output", str(out)]) == cli.EXIT_OK
    assert "complete: 4 rows" in capsys.readouterr().out
    assert cli.main(["analyze", str(out)]) == cli.EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["bond"] == 3 and "S_a1" in report["entropy"]
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"fit_window": [0.5, 2.0]}))
    assert cli.main(["analyze", str(out), "--spec", str(spec), "--output",
                     str(tmp_path / "r.json")]) == cli.EXIT_OK
    assert json.loads((tmp_path / "r.json").read_text())["fit_window_beta"] == [0.5, 2.0]
    assert cli.main(["report", str(out), "--output", str(tmp_path / "tables")]) == cli.EXIT_OK
    assert (tmp_path / "tables" / "entropy_vs_beta.csv").exists()


def test_run_uses_config_output_dir(config_file, tmp_path):
    assert cli.main(["run", str(config_file)]) == cli.EXIT_OK
    assert (tmp_path / "default_out" / "results.csv").exists()


def test_budget_exit_and_resume(config_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["run", str(config_file), "--output", str(out), "--max-bytes", "4000"])
    assert code == cli.EXIT_BUDGET
    assert "--resume" in capsys.readouterr().out
    code = cli.main(["run", str(config_file), "--output", str(out),
                     "--resume", str(out / "resume.json")])
    assert code == cli.EXIT_OK
    assert len((out / "results.csv").read_text().splitlines()) == 5


def test_verify_subset(capsys):
    assert cli.main(["verify", "--suite", "majorization,norms", "--quick", "--seed", "3"]) == 0
    text = capsys.readouterr().out
    assert "[PASS] suite majorization" in text and "all suites passed" in text


def test_verify_results_tolerance(tmp_path, capsys):
    cfg = ExperimentConfig(xxz(6, 1.0), EvolutionConfig(1.0, dtau=0.05, rel_weight_cutoff=1e-16,
                                                        beta_grid=[0.5]), alphas=[1.0])
    cfg.dump(tmp_path / "c.json")
    assert cli.main(["run", str(tmp_path / "c.json"), "--output", str(tmp_path / "o")]) == 0
    args = ["verify", "--suite", "ed", "--results", str(tmp_path / "o")]
    assert cli.main(args) == cli.EXIT_OK
    assert cli.main(args + ["--tolerance", "1e-14"]) == cli.EXIT_FAILED


def test_usage_errors(tmp_path, capsys):
    assert cli.main(["verify", "--suite", "bogus"]) == cli.EXIT_USAGE
    assert "unknown suite" in capsys.readouterr().err
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "nonsense": 2}')
    assert cli.main(["run", str(bad)]) == cli.EXIT_USAGE
    assert "error:" in capsys.readouterr().err
    assert cli.main(["analyze", str(tmp_path / "missing")]) == cli.EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        cli.main(["frobnicate"])
    assert info.value.code == 2


def test_thread_selection(monkeypatch):
    parser = cli.build_parser()
    monkeypatch.delenv(cli.THREADS_ENV, raising=False)
    assert cli._threads(parser.parse_args(["verify"])) is None
    monkeypatch.setenv(cli.THREADS_ENV, "3")
    assert cli._threads(parser.parse_args(["verify"])) == 3
    assert cli._threads(parser.parse_args(["--threads", "1", "verify"])) == 1


def test_threads_flag_runs(capsys):
    assert cli.main(["--threads", "1", "verify", "--suite", "norms", "--quick"]) == 0
