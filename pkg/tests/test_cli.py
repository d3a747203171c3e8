import json
import os
import subprocess
import sys

import numpy as np
import pytest

from fiducial.cli import ConfigError, config_to_argv, main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_corr_writes_csv_and_summary(tmp_path, capsys):
    path = tmp_path / "s.csv"
    code, out, _ = run(["corr", "--r", "0.5", "--n", "10", "--draws", "2000", "--seed", "42",
                        "--out", str(path)], capsys)
    assert code == 0
    summary = json.loads(out)
    assert summary["seed"] == 42 and set(summary["percentiles"]) == {"0.025", "0.5", "0.975"}
    lines = path.read_text().splitlines()
    assert lines[0] == "draw_index,value" and len(lines) == 2001
    values = np.array([float(v.split(",")[1]) for v in lines[1:]])
    assert np.all(np.abs(values) < 1)


def test_gamma_shape_from_data(capsys):
    code, out, _ = run(["gamma-shape", "--y", "1.2,3.4,0.8,2.2", "--draws", "200"], capsys)
    assert code == 0
    assert 0 < json.loads(out)["w"] < 1


def test_digitized_example(capsys):
    code, out, _ = run(["digitized", "--pmf=-1:0.2,0:0.5,1:0.3", "--d", "1", "--x", "0"], capsys)
    summary = json.loads(out)
    assert code == 0
    assert summary["theta"] == [-1.0, 0.0, 1.0]
    assert summary["cdf"] == pytest.approx([0.3, 0.8, 1.0], abs=1e-15)


@pytest.mark.parametrize("model", ["A", "B"])
def test_truncated(model, capsys):
    code, out, _ = run(["truncated", "--model", model, "--xbar", "0.0", "--mu-max", "0.0",
                        "--draws", "1000"], capsys)
    assert code == 0
    assert json.loads(out)["point_mass"] == 0.5


@pytest.mark.parametrize("model", ["line-difference", "line-ratio", "circle", "projection"])
def test_conditional(model, tmp_path, capsys):
    args = ["conditional", "--model", model, "--draws", "500", "--out", str(tmp_path / "d.csv")]
    if model == "projection":
        args += ["--x", "1,2,3", "--basis", "1,1,1"]
    code, out, _ = run(args, capsys)
    assert code == 0
    assert json.loads(out)["model"] == model
    assert len((tmp_path / "d.csv").read_text().splitlines()) == 501


def test_coverage_report_keys(capsys):
    code, out, _ = run(["coverage", "--model", "location-normal", "--reps", "100", "--draws", "50"],
                       capsys)
    report = json.loads(out)
    assert code == 0
    assert list(report) == ["model", "seed", "levels", "coverages", "reps", "draws_per_rep", "elapsed_ms"]
    assert report["elapsed_ms"] is None


def test_coverage_timing_flag(capsys):
    _, out, _ = run(["coverage", "--model", "location-normal", "--reps", "100", "--draws", "20", "--timing"], capsys)
    assert json.loads(out)["elapsed_ms"] >= 0


def test_equivalence_location(capsys):
    code, out, _ = run(["equivalence", "--model", "location", "--draws", "20000"], capsys)
    assert code == 0
    assert json.loads(out)["pass"] is True


@pytest.mark.parametrize("argv", [
    ["bogus"],
    [],
    ["corr", "--r", "0.5"],
    ["corr", "--r", "2", "--n", "10"],
    ["coverage", "--reps", "0"],
    ["digitized", "--pmf", "0:0.5,1:0.4"],
])
def test_config_and_domain_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err.startswith("ERROR:")
    assert err.split(":")[1] in {"config", "DomainError", "EmptySample", "NotSimple", "NonOrthonormalBasis"}


def test_numeric_failure_exit_3(capsys):
    code, _, err = run(["conditional", "--model", "line-ratio", "--x", "1e200,1e200"], capsys)
    assert code == 3
    assert err.startswith("ERROR:NonFiniteNormalization:")


def test_config_translation():
    config = {"kind": "coverage", "model": "location-normal", "params": {"theta0": 0.5, "levels": [0.1, 0.5]},
              "seed": 3, "sizes": {"reps": 100, "draws": 20}, "out": None}
    argv = config_to_argv(config)
    assert argv[:5] == ["coverage", "--seed", "3", "--model", "location-normal"]
    assert "--levels" in argv and "0.1,0.5" in argv
    with pytest.raises(ConfigError):
        config_to_argv({**config, "extra": 1})
    with pytest.raises(ConfigError):
        config_to_argv({k: v for k, v in config.items() if k != "out"})


def test_config_file_matches_flags(tmp_path, capsys):
    config = {"kind": "coverage", "model": "location-normal", "params": {"theta0": 0.5},
              "seed": 3, "sizes": {"reps": 100, "draws": 20}, "out": str(tmp_path / "r.json")}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(config))
    assert main(["--config", str(path)]) == 0
    main(["coverage", "--model", "location-normal", "--theta0", "0.5", "--seed", "3", "--reps", "100",
          "--draws", "20", "--out", str(tmp_path / "flags.json")])
    assert (tmp_path / "r.json").read_bytes() == (tmp_path / "flags.json").read_bytes()
    path.write_text("{not json")
    assert main(["--config", str(path)]) == 2
    assert capsys.readouterr().err.startswith("ERROR:config:")


def _fid(args, threads, cwd):
    env = {**os.environ, "FID_THREADS": str(threads)}
    return subprocess.run([sys.executable, "-m", "fiducial", *args], env=env, cwd=cwd,
                          capture_output=True, check=True)


def test_byte_identical_across_runs_and_threads(tmp_path):
    args = ["coverage", "--model", "correlation", "--rho0", "0.3", "--n", "8", "--reps", "150",
            "--draws", "100", "--seed", "11", "--out", "r.json"]
    outputs = []
    for threads in (1, 1, 3):
        _fid(args, threads, tmp_path)
        outputs.append((tmp_path / "r.json").read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]
    csv_args = ["gamma-shape", "--n", "4", "--alpha0", "1.5", "--draws", "300", "--seed", "5", "--out", "g.csv"]
    first = _fid(csv_args, 1, tmp_path).stdout, (tmp_path / "g.csv").read_bytes()
    second = _fid(csv_args, 4, tmp_path).stdout, (tmp_path / "g.csv").read_bytes()
    assert first == second
