import json
import shutil

import pytest
import yaml

from sessionaware.cli import main
from sessionaware.eventlog import ColumnFormat, write_events
from sessionaware.synthetic import synthetic_log

RETAIL_FORMAT = {"user": "visitorid", "item": "itemid", "timestamp": "timestamp", "unit": "ms"}


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    log = synthetic_log(n_users=80, sessions_per_user=12, n_items=150, seed=8, days=60)
    write_events(log, root / "events.csv", ColumnFormat(**RETAIL_FORMAT))
    config = {
        "dataset": {"name": "toy", "path": "events.csv", "format": RETAIL_FORMAT},
        "preprocess": {"num_slices": 2, "min_item_support": 2},
        "algorithms": [{"name": "sr", "params": {"steps": 5, "weighting": "div"}}, "vsknn_b"],
        "metrics": {"cutoffs": [5, 20]},
        "tuning": {"trials": 2, "posthoc_trials": 2},
        "seed": 1,
        "out": "results",
    }
    (root / "run.yaml").write_text(yaml.safe_dump(config))
    assert main(["preprocess", "--config", str(root / "run.yaml")]) == 0
    return root


def test_preprocess_writes_slices_and_manifest(workspace):
    data = workspace / "results" / "toy"
    assert sorted(p.name for p in data.glob("slice_*")) == ["slice_0", "slice_1"]
    manifest = json.loads((data / "manifest.json").read_text())
    assert manifest["num_slices"] == 2 and manifest["tuning_slice"] in (0, 1)
    for role in ("train", "validation", "test"):
        assert (data / "slice_0" / f"{role}.csv").is_file()
    assert set(json.loads((data / "id_map.json").read_text())) == {"users", "items"}


def test_preprocess_is_idempotent(workspace, tmp_path):
    out = tmp_path / "again"
    assert main(["preprocess", "--config", str(workspace / "run.yaml"), "--out", str(out)]) == 0
    first = (workspace / "results" / "toy" / "manifest.json").read_bytes()
    assert (out / "toy" / "manifest.json").read_bytes() == first
    assert (out / "toy" / "slice_1" / "test.csv").read_bytes() == (
        workspace / "results" / "toy" / "slice_1" / "test.csv"
    ).read_bytes()


def test_tune_eval_report(workspace, capsys):
    cfg = str(workspace / "run.yaml")
    assert main(["tune", "--config", cfg, "--algorithms", "vsknn_b"]) == 0
    data = workspace / "results" / "toy"
    t = json.loads((data / "manifest.json").read_text())["tuning_slice"]
    search = json.loads((data / f"slice_{t}" / "vsknn_b" / "search.json").read_text())
    assert len(search["trials"]) == 2
    assert main(["eval", "--config", cfg]) == 0
    for i in (0, 1):
        for algo in ("sr", "vsknn_b"):
            report = json.loads((data / f"slice_{i}" / algo / "report.json").read_text())
            assert report["prediction_events"] > 0
    params = json.loads((data / "slice_0" / "vsknn_b" / "params.json").read_text())
    assert params == search["best_config"]
    capsys.readouterr()
    assert main(["report", "--config", cfg]) == 0
    table = capsys.readouterr().out.splitlines()
    assert table[0].startswith("algorithm") and len(table) == 3
    maps = [float(line.split()[5]) for line in table[1:]]
    assert maps == sorted(maps, reverse=True)
    assert (data / "report.csv").is_file() and (data / "report.txt").is_file()


def test_tune_resume_reuses_trials(workspace):
    cfg = str(workspace / "run.yaml")
    assert main(["tune", "--config", cfg, "--algorithms", "sr", "--trials", "3", "--out", str(workspace / "r2")]) == 1
    shutil.copytree(workspace / "results", workspace / "r2")
    args = ["tune", "--config", cfg, "--algorithms", "sr", "--trials", "3", "--out", str(workspace / "r2")]
    assert main(args) == 0
    data = workspace / "r2" / "toy"
    t = json.loads((data / "manifest.json").read_text())["tuning_slice"]
    first = (data / f"slice_{t}" / "sr" / "search.json").read_text()
    assert main(args + ["--resume"]) == 0
    second = json.loads((data / f"slice_{t}" / "sr" / "search.json").read_text())
    assert all(trial["cached"] for trial in second["trials"])
    assert second["best_config"] == json.loads(first)["best_config"]


def test_missing_slice_is_flagged(workspace, tmp_path, capsys):
    results = tmp_path / "partial"
    shutil.copytree(workspace / "results" / "toy", results)
    (results / "slice_1" / "sr" / "report.json").unlink()
    capsys.readouterr()
    assert main(["report", str(results)]) == 0
    out = capsys.readouterr().out
    assert any(line.startswith("sr ") and "incomplete" in line for line in out.splitlines())


def test_errors_exit_nonzero(workspace, tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("visitorid,itemid,time\n1,2,3\n")
    config = {"dataset": {"name": "bad", "path": str(bad), "format": RETAIL_FORMAT}, "out": str(tmp_path)}
    (tmp_path / "bad.yaml").write_text(yaml.safe_dump(config))
    assert main(["preprocess", "--config", str(tmp_path / "bad.yaml")]) == 1
    assert "'timestamp'" in capsys.readouterr().err

    assert main(["tune", "--config", str(workspace / "run.yaml"), "--algorithms", "gru4rec"]) == 1
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["report", str(empty)]) == 1


def test_help_runs(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    assert "preprocess" in capsys.readouterr().out
