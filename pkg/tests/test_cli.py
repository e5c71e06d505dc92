import csv
import json

import pytest

from smallwindow.cli import main, parse_int_list
from smallwindow.dataset import load_csv
from smallwindow.harness import Kind, ModelSpec, run_series
from smallwindow.simulator import SimConfig, generate


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def drift_csv(tmp_path_factory):
    out = tmp_path_factory.mktemp("sim")
    assert main(["simulate", "--regime", "drifting", "--n", "120", "--out", str(out)]) == 0
    return out / "sim_drifting_seed0.csv"


def test_parse_int_list():
    assert parse_int_list("1..3,7") == [1, 2, 3, 7]
    assert parse_int_list("4") == [4]


def test_simulate_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--regime", "monotonic", "--seed", "7", "--out", str(a)]) == 0
    assert main(["simulate", "--regime", "monotonic", "--seed", "7", "--out", str(b)]) == 0
    fa, fb = a / "sim_monotonic_seed7.csv", b / "sim_monotonic_seed7.csv"
    assert fa.read_bytes() == fb.read_bytes()
    assert "318 rows" in capsys.readouterr().out


def test_simulate_row_count(tmp_path):
    assert main(["simulate", "--regime", "drifting", "--n", "600", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "sim_drifting_seed0.csv").read_text().splitlines()
    assert len(lines) == 601


def test_simulate_bad_regime(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--regime", "chaotic", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_sweep_window_standard_grid(tmp_path):
    out = tmp_path / "w"
    code = main(["sweep-window", "--sim", "drifting", "--n", "200", "--models", "mmw,pls",
                 "--out", str(out)])
    assert code == 0
    table = rows(out / "summary.csv")
    assert [r["model"] for r in table].count("pls") == 12
    assert [r["model"] for r in table].count("mmw") == 12
    assert len(json.loads((out / "summary.json").read_text())) == 24
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["windows"] == [2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 25]
    assert len(list((out / "records").glob("*.csv"))) == 24


def test_sweep_window_single_cell_matches_run_series(tmp_path, drift_csv):
    out = tmp_path / "one"
    assert main(["sweep-window", "--data", str(drift_csv), "--models", "pls", "--windows", "5",
                 "--out", str(out)]) == 0
    (row,) = rows(out / "summary.csv")
    rep = run_series(load_csv(drift_csv, -1), ModelSpec(Kind.PLS, 5))
    assert float(row["rmsep"]) == rep.rmsep and int(row["n"]) == rep.n_predictions


def test_missing_y_column(tmp_path, drift_csv, capsys):
    code = main(["one-step", "--data", str(drift_csv), "--y-col", "nope", "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err
    assert "nope" in err and str(drift_csv) in err


def test_sweep_delay_grid(tmp_path, drift_csv):
    out = tmp_path / "d"
    assert main(["sweep-delay", "--data", str(drift_csv), "--models", "mmw,rpls", "--mode",
                 "delayed", "--delays", "1..9", "--out", str(out)]) == 0
    table = rows(out / "summary.csv")
    assert len(table) == 18
    assert [int(r["delay"]) for r in table if r["model"] == "rpls"] == list(range(1, 10))


def test_delay_one_same_in_both_modes(tmp_path, drift_csv):
    result = {}
    for mode in ("continuous", "delayed"):
        out = tmp_path / mode
        assert main(["sweep-delay", "--data", str(drift_csv), "--models", "pls,rf,rfpls",
                     "--mode", mode, "--delays", "1", "--trees", "20", "--seed", "4",
                     "--out", str(out)]) == 0
        result[mode] = [(r["model"], r["rmsep"]) for r in rows(out / "summary.csv")]
    assert result["continuous"] == result["delayed"]


def test_unknown_model_is_usage_error(tmp_path, drift_csv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["sweep-delay", "--data", str(drift_csv), "--models", "pls,svm", "--out", str(tmp_path)])
    assert exc.value.code == 2
    assert "{mmw, pls, rpls, rf, rfpls}" in capsys.readouterr().err


def test_one_step_five_models(tmp_path, drift_csv):
    out = tmp_path / "t1"
    assert main(["one-step", "--data", str(drift_csv), "--trees", "20", "--out", str(out)]) == 0
    table = rows(out / "summary.csv")
    assert [r["model"] for r in table] == ["mmw", "pls", "rpls", "rf", "rfpls"]
    mmw = run_series(load_csv(drift_csv, -1), ModelSpec(Kind.MMW, 4))
    assert float(table[0]["rmsep"]) == mmw.rmsep >= 0


def test_preset_applies_lag_and_scoring(tmp_path):
    out = tmp_path / "p"
    assert main(["one-step", "--sim", "drifting", "--n", "100", "--preset", "debutanizer",
                 "--models", "mmw", "--out", str(out)]) == 0
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["y_lag"] == 8 and cfg["lambda"] == 0.01 and cfg["n_samples"] == 92
    assert cfg["score_from"] == 4
    (row,) = rows(out / "summary.csv")
    assert int(row["n"]) == 92 - 4


def test_short_dataset_names_limit(tmp_path, capsys):
    code = main(["sweep-window", "--sim", "drifting", "--n", "50", "--windows", "2..60",
                 "--models", "mmw", "--out", str(tmp_path)])
    assert code == 1
    assert "61" in capsys.readouterr().err


def test_rerun_is_byte_identical(tmp_path, drift_csv):
    outs = [tmp_path / "r1", tmp_path / "r2"]
    for out in outs:
        assert main(["sweep-window", "--data", str(drift_csv), "--models", "rf,rfpls",
                     "--windows", "3,4", "--trees", "15", "--seed", "9", "--out", str(tmp_path / "r")]) == 0
        (tmp_path / "r").rename(out)
    for name in ("summary.csv", "summary.json", "config.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
