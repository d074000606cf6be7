import pytest

import database


@pytest.fixture(autouse=True)
def fresh_db(tmp_path):
    database.init_db(f"sqlite:///{tmp_path / 'manifests.db'}")


def test_run_lifecycle():
    run_id = database.start_run("asym", {"epsilon": 0.05}, "0.1.0")
    run = database.get_run(run_id)
    assert run["status"] == "running"
    assert run["config"] == {"epsilon": 0.05}

    database.finish_run(run_id, "asym", "0.1.0", ["out/a.json"])
    run = database.get_run(run_id)
    assert run["status"] == "finished"
    assert run["artifacts"] == ["out/a.json"]
    assert run["events"] == ["started", "finished"]


def test_failed_run_keeps_history():
    run_id = database.start_run("rates", {"table": 1}, "0.1.0")
    database.fail_run(run_id, "rates", "0.1.0", "no-convergence")
    run = database.get_run(run_id)
    assert run["status"] == "failed"
    assert run["error"] == "no-convergence"
    assert run["events"] == ["started", "failed"]


def test_list_and_missing_runs():
    first = database.start_run("asym", {}, "0.1.0")
    second = database.start_run("stationary", {}, "0.1.0")
    ids = [run["run_id"] for run in database.list_runs()]
    assert ids == [first, second]
    assert database.get_run("nope") is None
