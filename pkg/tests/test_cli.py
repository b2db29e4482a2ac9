import json
import math
from pathlib import Path

import numpy as np
import pytest

from spde_lab.common import DBError, Direction, RunStatus, derive_seed
from spde_lab.db import RunLedger, file_digest
from spde_lab.main import EXIT_ACCEPTANCE, EXIT_CONFIG, EXIT_OK, main
from spde_lab.report import plain, write_table

from .conftest import small_document

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def run_cli(command: str, config: Path, out: Path, *extra: str) -> int:
    return main([command, "--config", str(config), "--out", str(out), "--log-level", "WARNING", *extra])


def single_run_dir(out: Path, kind: str) -> Path:
    dirs = sorted(out.glob(f"{kind}-*"))
    assert len(dirs) == 1
    return dirs[0]


def test_unknown_key_is_config_error(write_config, tmp_path):
    document = small_document("solve", grid={"size": 16})
    code = run_cli("solve", write_config(document), tmp_path / "out")
    assert code == EXIT_CONFIG


def test_invalid_riesz_exponent_leaves_no_run(write_config, tmp_path):
    document = small_document("solve", covariance={"kind": "riesz", "k": 2, "beta": 2.5}, grid={"N": 8})
    out = tmp_path / "out"
    assert run_cli("solve", write_config(document), out) == EXIT_CONFIG
    assert not (out / "runs.db").exists()


def test_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json", encoding="utf-8")
    assert run_cli("solve", path, tmp_path / "out") == EXIT_CONFIG


def test_solve_writes_report_manifest_and_ledger(write_config, tmp_path):
    out = tmp_path / "out"
    code = run_cli("solve", write_config(small_document("solve")), out, "--format", "csv")
    assert code in (EXIT_OK, EXIT_ACCEPTANCE)
    run_dir = single_run_dir(out, "solve")

    report = json.loads((run_dir / "report.json").read_text(encoding="utf-8"))
    assert report["kind"] == "solve"
    assert report["status"] == "complete"
    assert report["result"]["terminal_second_moment"]["n_paths"] == 4
    assert "2" in report["result"]["moment_sup"]

    header = (run_dir / "moments.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "t,moment_p2,se_p2"
    rows = np.loadtxt(run_dir / "moments.csv", delimiter=",", skiprows=1)
    assert rows.shape == (9, 3)

    manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["master_seed"] == 7
    assert manifest["path_seeds"] == [derive_seed(7, i) for i in range(4)]
    assert manifest["status"] == "complete"
    for entry in manifest["artifacts"]:
        assert file_digest(run_dir / entry["name"]) == (entry["sha256"], entry["size"])
    assert {entry["name"] for entry in manifest["artifacts"]} == {"report.json", "moments.csv"}

    with RunLedger(out / "runs.db") as ledger:
        runs = ledger.get_runs()
        assert len(runs) == 1
        assert runs[0].status is RunStatus.Complete
        assert runs[0].id == manifest["run_id"]
        assert ledger.get_path_seeds(runs[0].id) == manifest["path_seeds"]
        names = {a.name for a in ledger.get_artifacts(runs[0].id)}
        assert names == {"report.json", "moments.csv", "manifest.json"}


def test_ledger_failure_marks_run_failed(write_config, tmp_path, monkeypatch):
    def refuse(self, run_id, path, name=None):
        raise DBError("产出文件登记被拒绝")

    monkeypatch.setattr(RunLedger, "add_artifact", refuse)
    out = tmp_path / "out"
    code = run_cli("solve", write_config(small_document("solve")), out)
    assert code == DBError.exit_code
    monkeypatch.undo()

    with RunLedger(out / "runs.db") as ledger:
        runs = ledger.get_runs()
        assert len(runs) == 1
        assert runs[0].status is RunStatus.Failed
        assert "产出文件登记被拒绝" in runs[0].message


def test_results_do_not_depend_on_thread_count(write_config, tmp_path):
    document = small_document("solve", experiment={"paths": 20})
    config = write_config(document)
    outputs = []
    for threads in ("1", "3"):
        out = tmp_path / f"threads-{threads}"
        code = run_cli("solve", config, out, "--threads", threads, "--format", "csv")
        assert code in (EXIT_OK, EXIT_ACCEPTANCE)
        run_dir = single_run_dir(out, "solve")
        outputs.append(
            ((run_dir / "report.json").read_bytes(), (run_dir / "moments.csv").read_bytes())
        )
    assert outputs[0] == outputs[1]


def test_seed_override_changes_results(write_config, tmp_path):
    config = write_config(small_document("solve"))
    reports = []
    for seed in ("1", "2"):
        out = tmp_path / f"seed-{seed}"
        run_cli("solve", config, out, "--seed", seed)
        reports.append((single_run_dir(out, "solve") / "report.json").read_bytes())
    assert reports[0] != reports[1]


def test_subcommand_overrides_config_kind(write_config, tmp_path):
    out = tmp_path / "out"
    document = small_document("solve", noise={"samples": 200, "lags": [0, 1]})
    code = run_cli("noise", write_config(document), out)
    assert code in (EXIT_OK, EXIT_ACCEPTANCE)
    run_dir = single_run_dir(out, "noise")
    report = json.loads((run_dir / "report.json").read_text(encoding="utf-8"))
    assert report["kind"] == "noise"
    assert (run_dir / "covariance.json").exists()


def test_condition_check_run(write_config, tmp_path):
    document = small_document("check", condition={"families": ["riesz", "bessel"], "draws": 2})
    out = tmp_path / "out"
    code = run_cli("check", write_config(document), out)
    assert code in (EXIT_OK, EXIT_ACCEPTANCE)
    report = json.loads((single_run_dir(out, "check") / "report.json").read_text(encoding="utf-8"))
    assert report["result"]["analytic_agreement"] == 1.0
    assert len(report["result"]["draws"]) == 4
    assert report["acceptance"]["analytic_rule"] is True
    assert report["acceptance"]["semigroup"] is True


def test_plain_replaces_non_finite_values():
    value = {
        "a": math.nan,
        "b": [np.float64(1.5), np.inf],
        "c": Direction.Time,
        "d": np.int64(3),
        "e": np.array([1.0, np.nan]),
        "f": np.bool_(True),
    }
    assert plain(value) == {"a": None, "b": [1.5, None], "c": "time", "d": 3, "e": [1.0, None], "f": True}


def test_write_table_formats(tmp_path):
    data = np.array([[0.0, 1.0], [0.5, 2.0]])
    csv_path = write_table(tmp_path, "demo", ["t", "value"], data, "csv")
    assert csv_path.name == "demo.csv"
    assert csv_path.read_text(encoding="utf-8").splitlines() == ["t,value", "0,1", "0.5,2"]
    json_path = write_table(tmp_path, "demo", ["t", "value"], data, "json")
    assert json.loads(json_path.read_text(encoding="utf-8")) == {
        "columns": ["t", "value"],
        "rows": [[0.0, 1.0], [0.5, 2.0]],
    }


@pytest.mark.slow
@pytest.mark.parametrize("name", ["check", "noise", "solve", "picard", "factorize", "regularity"])
def test_shipped_configs_pass_acceptance(name, tmp_path):
    out = tmp_path / "out"
    code = run_cli(name, CONFIG_DIR / f"{name}.json", out, "--threads", "0")
    report = json.loads((single_run_dir(out, name) / "report.json").read_text(encoding="utf-8"))
    assert report["status"] == "complete"
    assert code == EXIT_OK, report["acceptance"]
