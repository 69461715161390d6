import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from dessca.cli import main
from dessca.doe import FIG2_POINTS
from dessca.harness import RunSummary, write_summary_json

SMALL = ["--set", "total_steps=400", "--set", "validation_episodes=2",
         "--set", "validation_steps=50"]


def read_csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_run_file_count(tmp_path, capsys):
    code = main(["run", "--env", "mountain_car", "--strategy", "dessca", "--repetitions", "5",
                 "--out", str(tmp_path), *SMALL])
    assert code == 0
    assert len(list(tmp_path.glob("mountain_car_dessca_rep*.csv"))) == 5
    assert [p.name for p in tmp_path.glob("*.json")] == ["mountain_car_dessca_summary.json"]
    assert "median" in capsys.readouterr().out


def test_run_both_strategies_then_summarize(tmp_path, capsys):
    assert main(["run", "--env", "cartpole", "--strategy", "both", "--repetitions", "2",
                 "--out", str(tmp_path), *SMALL]) == 0
    es = tmp_path / "cartpole_es_summary.json"
    ds = tmp_path / "cartpole_dessca_summary.json"
    assert es.exists() and ds.exists()
    capsys.readouterr()
    assert main(["summarize", str(es), str(ds)]) == 0
    assert "significant" in capsys.readouterr().out


def test_run_pmsm_byte_identical(tmp_path):
    args = ["run", "--env", "pmsm", "--strategy", "es", "--seed", "7", "--repetitions", "2",
            "--set", "total_steps=300", "--set", "validation_steps=600"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert len(names) == 3
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_config_file_and_override_precedence(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("env: mountain_car\nstrategy: es\ntotal_steps: 10000\nrepetitions: 2\n"
                   "validation_episodes: 1\nvalidation_steps: 10\n")
    assert main(["run", "--config", str(cfg), "--set", "total_steps=250",
                 "--out", str(tmp_path)]) == 0
    text = (tmp_path / "mountain_car_es_rep000.csv").read_text().splitlines()
    assert sum(line.startswith("train,") for line in text) == 250


@pytest.mark.parametrize("extra", [
    ["--set", "nonsense=1"],
    ["--set", "bandwidth=-1"],
    ["--repetitions", "1"],
    ["--set", "total_steps"],
])
def test_invalid_config_exit_2(tmp_path, capsys, extra):
    assert main(["run", "--env", "mountain_car", "--out", str(tmp_path), *extra]) == 2
    err = capsys.readouterr().err
    assert "error" in err
    if "nonsense=1" in extra:
        assert "valid keys" in err and "bandwidth" in err


def test_sample_rows_in_box(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sample", "--dim", "2", "--n", "100", "--seed", "0", "--out", str(out)]) == 0
    pts = read_csv(out)
    assert pts.shape == (100, 2) and np.all(np.abs(pts) <= 1.0)


def test_sample_second_point_far_in_1d(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sample", "--dim", "1", "--n", "2", "--seed", "4", "--out", str(out)]) == 0
    pts = read_csv(out)[:, 0]
    # grid oracle of e_c = 1/2 - gaussian bump after one observation
    def e_c(x):
        return 0.5 - np.exp(-0.5 * ((x - pts[0]) / 0.1) ** 2) / (0.1 * np.sqrt(2 * np.pi))

    grid = np.linspace(-1, 1, 2001)
    top = e_c(grid).max()
    near_opt = grid[e_c(grid) >= top - 1e-9]
    assert np.min(np.abs(near_opt - pts[0])) > 0.5
    assert e_c(pts[1]) >= top - 1e-9
    assert abs(pts[1] - pts[0]) > 0.5


def test_sample_ball_reference(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sample", "--dim", "2", "--n", "10", "--reference", "ball:0.5",
                 "--out", str(out)]) == 0
    assert np.all(np.linalg.norm(read_csv(out), axis=1) <= 0.5)


def test_sample_degenerate_reference_exit_2(capsys):
    assert main(["sample", "--dim", "3", "--n", "5", "--reference", "ball:0.01"]) == 2
    assert "degenerate" in capsys.readouterr().err


def test_sample_streams_points(tmp_path):
    # each row must be readable from the pipe before the process finishes
    proc = subprocess.Popen([sys.executable, "-m", "dessca", "sample", "--dim", "4", "--n", "400"],
                            stdout=subprocess.PIPE, text=True)
    try:
        assert proc.stdout.readline().strip() == "x1,x2,x3,x4"
        first = proc.stdout.readline()
        assert len(first.split(",")) == 4
        assert proc.poll() is None
    finally:
        proc.kill()
        proc.wait()


def test_density_grid_csv(tmp_path):
    pts = tmp_path / "p.csv"
    np.savetxt(pts, FIG2_POINTS, delimiter=",", header="x1,x2", comments="")
    out = tmp_path / "d.csv"
    assert main(["density", "--points", str(pts), "--bandwidth", "0.1", "--resolution", "41",
                 "--out", str(out)]) == 0
    grid = read_csv(out)
    assert grid.shape == (41 * 41, 3)
    assert np.all(np.isfinite(grid[:, 2])) and np.all(grid[:, 2] >= 0)
    assert (out.read_text().splitlines()[0]) == "x1,x2,density"


def test_density_wrong_dimension_exit_2(tmp_path):
    pts = tmp_path / "p.csv"
    np.savetxt(pts, np.zeros((4, 3)), delimiter=",")
    assert main(["density", "--points", str(pts)]) == 2


def _summary(path, median, lo, hi):
    s = RunSummary(median=median, iqr=0.02, mean=(lo + hi) / 2, ci_low=lo, ci_high=hi, n=50)
    write_summary_json(s, path)
    return path


def test_summarize_published_pmsm_column(tmp_path, capsys):
    es = _summary(tmp_path / "es.json", 0.79565, 0.78234, 0.81299)
    ds = _summary(tmp_path / "ds.json", 0.88273, 0.86587, 0.88325)
    assert main(["summarize", str(es), str(ds)]) == 0
    out = capsys.readouterr().out
    assert "significant" in out and "yes" in out
    assert "+10.94" in out  # ratio of the rounded medians is 10.9445


def test_summarize_overlap_is_not_significant(tmp_path, capsys):
    es = _summary(tmp_path / "es.json", 0.80, 0.78, 0.82)
    ds = _summary(tmp_path / "ds.json", 0.81, 0.80, 0.83)
    assert main(["summarize", str(es), str(ds)]) == 0
    assert capsys.readouterr().out.rstrip().endswith("no")


def test_summarize_malformed_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    good = _summary(tmp_path / "ok.json", 0.5, 0.4, 0.6)
    assert main(["summarize", str(bad), str(good)]) == 2
    bad.write_text(json.dumps({"median": 1.0}))
    assert main(["summarize", str(bad), str(good)]) == 2


def test_sample_and_density_byte_identical(tmp_path):
    for i in range(2):
        assert main(["sample", "--dim", "3", "--n", "20", "--seed", "9",
                     "--out", str(tmp_path / f"s{i}.csv")]) == 0
        assert main(["density", "--bandwidth", "0.25", "--out", str(tmp_path / f"d{i}.csv")]) == 0
    assert (tmp_path / "s0.csv").read_bytes() == (tmp_path / "s1.csv").read_bytes()
    assert (tmp_path / "d0.csv").read_bytes() == (tmp_path / "d1.csv").read_bytes()
