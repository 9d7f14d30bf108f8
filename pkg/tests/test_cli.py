import json

import pytest

from mvocc.cli import main


@pytest.fixture
def synth_dir(tmp_path):
    assert main(["synth", "--out", str(tmp_path / "data"), "--n-target", "40", "--n-outlier", "15", "--dim", "4"]) == 0
    return tmp_path / "data"


def write_config(path, method, inputs, grid, **extra):
    lines = [f'method = "{method}"', "inputs = [" + ", ".join(f'"{p}"' for p in inputs) + "]", 'target = "target"']
    lines += [f"{k} = {json.dumps(v)}" for k, v in extra.items()]
    lines.append("[grid]")
    lines += [f"{k} = {json.dumps(v)}" for k, v in grid.items()]
    path.write_text("\n".join(lines) + "\n")
    return path


def test_synth_defaults(tmp_path, capsys):
    assert main(["synth", "--out", str(tmp_path)]) == 0
    for name in ("view1.csv", "view2.csv"):
        lines = (tmp_path / name).read_text().splitlines()
        assert len(lines) == 81
    assert not (tmp_path / "view3.csv").exists()


def test_synth_is_byte_stable(tmp_path):
    main(["synth", "--seed", "7", "--out", str(tmp_path / "a")])
    main(["synth", "--seed", "7", "--out", str(tmp_path / "b")])
    for name in ("view1.csv", "view2.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_synth_single_view(tmp_path):
    main(["synth", "--views", "1", "--out", str(tmp_path)])
    assert sorted(p.name for p in tmp_path.iterdir()) == ["view1.csv"]


def test_cv_writes_outputs(tmp_path, synth_dir, capsys):
    cfg = write_config(tmp_path / "c.toml", "svdd", [synth_dir / "view1.csv", synth_dir / "view2.csv"], {"c": [0.1, 0.3]}, k_inner=3)
    assert main(["cv", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 0
    out = tmp_path / "out"
    results = json.loads((out / "results.json").read_text())
    assert results["format"] == "mvocc-results"
    assert results["config"]["seed"] == 0
    assert len(results["runs"]) == 1
    folds = json.loads((out / "folds.json").read_text())
    assert len(folds["subject_ids"]) == 55 and folds["k"] == 5
    assert "svdd" in (out / "report.txt").read_text()
    assert "GM" in capsys.readouterr().out


def test_cv_seed_override_and_rerun(tmp_path, synth_dir):
    cfg = write_config(tmp_path / "c.toml", "svdd", [synth_dir / "view1.csv", synth_dir / "view2.csv"], {"c": [0.1, 0.3]}, k_inner=3)
    assert main(["cv", "--config", str(cfg), "--seed", "11", "--out", str(tmp_path / "a")]) == 0
    first = json.loads((tmp_path / "a" / "results.json").read_text())
    assert first["config"]["seed"] == 11
    assert main(["cv", "--config", str(tmp_path / "a" / "results.json"), "--out", str(tmp_path / "b")]) == 0
    second = json.loads((tmp_path / "b" / "results.json").read_text())
    assert first["runs"] == second["runs"]


def test_cv_missing_input(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.toml", "svdd", [tmp_path / "missing.csv"], {"c": [0.1]})
    assert main(["cv", "--config", str(cfg)]) == 1
    assert "missing.csv" in capsys.readouterr().err


def test_cv_ms_svdd_single_view(tmp_path, synth_dir, capsys):
    cfg = write_config(tmp_path / "c.toml", "ms_svdd", [synth_dir / "view1.csv"], {"c": [0.1]})
    assert main(["cv", "--config", str(cfg)]) == 1
    assert "requires >= 2 views" in capsys.readouterr().err


def test_cv_no_feasible_point_is_runtime_error(tmp_path, synth_dir, capsys):
    cfg = write_config(tmp_path / "c.toml", "svdd", [synth_dir / "view1.csv", synth_dir / "view2.csv"], {"c": [0.01]}, k_inner=3)
    assert main(["cv", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "feasible" in capsys.readouterr().err


def test_cv_ms_svdd_rows_per_strategy(tmp_path, synth_dir):
    grid = {"eta": [0.0], "beta": [1.0], "c": [0.3], "d": [2], "reg": [0]}
    cfg = write_config(tmp_path / "c.toml", "ms_svdd", [synth_dir / "view1.csv", synth_dir / "view2.csv"], grid, k_inner=3)
    assert main(["cv", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    labels = [r["label"] for r in json.loads((tmp_path / "o" / "results.json").read_text())["runs"]]
    assert labels == ["ms_svdd_ds1", "ms_svdd_ds2", "ms_svdd_ds3", "ms_svdd_ds4"]


def test_train_then_eval(tmp_path, synth_dir, capsys):
    views = [synth_dir / "view1.csv", synth_dir / "view2.csv"]
    cfg = write_config(tmp_path / "c.toml", "svdd", views, {"c": [0.1, 0.3]}, k_inner=3)
    assert main(["train", "--config", str(cfg), "--out", str(tmp_path / "m")]) == 0
    model = tmp_path / "m" / "model.json"
    assert json.loads(model.read_text())["format"] == "mvocc-model"
    capsys.readouterr()
    assert main(["eval", "--model", str(model), "--data", *map(str, views), "--out", str(tmp_path / "e")]) == 0
    assert "TP=" in capsys.readouterr().out
    doc = json.loads((tmp_path / "e" / "eval.json").read_text())
    assert doc["confusion"]["tp"] + doc["confusion"]["fn"] == 40


def test_eval_empty_file(tmp_path, synth_dir):
    views = [synth_dir / "view1.csv", synth_dir / "view2.csv"]
    cfg = write_config(tmp_path / "c.toml", "svdd", views, {"c": [0.3]})
    main(["train", "--config", str(cfg), "--out", str(tmp_path / "m")])
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["eval", "--model", str(tmp_path / "m" / "model.json"), "--data", str(empty), str(empty)]) == 1


def test_eval_artifact_mismatch(tmp_path, synth_dir):
    views = [synth_dir / "view1.csv", synth_dir / "view2.csv"]
    cfg = write_config(tmp_path / "c.toml", "svdd", views, {"c": [0.3]})
    main(["train", "--config", str(cfg), "--out", str(tmp_path / "m")])
    path = tmp_path / "m" / "model.json"
    doc = json.loads(path.read_text())
    doc["method"] = "ocsvm"
    path.write_text(json.dumps(doc))
    assert main(["eval", "--model", str(path), "--data", *map(str, views)]) == 1


def test_eval_predictions_fixture(tmp_path, capsys):
    # tp=75, fn=13, fp=24, tn=18
    rows = ["label,prediction"] + ["MI,MI"] * 75 + ["MI,non-MI"] * 13 + ["non-MI,MI"] * 24 + ["non-MI,non-MI"] * 18
    path = tmp_path / "pred.csv"
    path.write_text("\n".join(rows) + "\n")
    assert main(["eval", "--predictions", str(path), "--target", "MI"]) == 0
    out = capsys.readouterr().out
    for value in ("85.23", "42.86", "75.76", "80.21", "71.54", "60.44"):
        assert value in out


def test_eval_predictions_needs_target(tmp_path):
    path = tmp_path / "pred.csv"
    path.write_text("label,prediction\nMI,MI\n")
    assert main(["eval", "--predictions", str(path)]) == 1
