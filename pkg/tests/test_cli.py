import json

import pytest

from gpxrl import cli
from gpxrl.dsl import Action, Cell, Observation
from gpxrl.env import Dataset, load_dataset, save_dataset

from conftest import GOAL_LEFT_SRC

SMALL = {"population_size": 60, "tournament_size": 6, "max_generations_per_length": 2}


def _run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    assert _run("gen-data", "--out", out, "--lengths", "3-9", "--count", "50") == 0
    return out


@pytest.fixture(scope="module")
def small_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "small.json"
    path.write_text(json.dumps({**SMALL, "max_sequence_length": 5}))
    return path


def _strip_timing(report):
    for rec in report["lengths"]:
        rec.pop("wall_clock_seconds")
    return report


# -- gen-data -------------------------------------------------------------------


def test_gen_data_writes_one_file_per_length(data_dir):
    names = sorted(p.name for p in data_dir.iterdir())
    assert names == [f"len_{n:03d}.json" for n in range(3, 10)] + ["manifest.json"]
    for n in range(3, 10):
        assert len(load_dataset(data_dir / f"len_{n:03d}.json")) == 50


def test_gen_data_is_deterministic(data_dir, tmp_path):
    assert _run("gen-data", "--out", tmp_path, "--lengths", "3-9", "--count", "50") == 0
    for n in range(3, 10):
        name = f"len_{n:03d}.json"
        assert (tmp_path / name).read_bytes() == (data_dir / name).read_bytes()
    a = json.loads((tmp_path / "manifest.json").read_text())
    b = json.loads((data_dir / "manifest.json").read_text())
    assert a["hash"] == b["hash"] and a["files"] == b["files"]


def test_gen_data_warns_when_windows_run_short(tmp_path):
    with pytest.warns(UserWarning, match="only 3 windows"):
        assert _run("gen-data", "--out", tmp_path, "--lengths", "100", "--count", "50") == 0
    assert len(load_dataset(tmp_path / "len_100.json")) == 3


def test_gen_data_bad_policy(tmp_path):
    assert _run("gen-data", "--out", tmp_path, "--policy", "psychic") == cli.EXIT_CONFIG


def test_gen_data_bad_maze_size(tmp_path):
    assert _run("gen-data", "--out", tmp_path, "--width", "8") == cli.EXIT_DATA


# -- evolve ---------------------------------------------------------------------


def test_evolve_writes_artifacts(data_dir, small_config, tmp_path):
    out = tmp_path / "run"
    assert _run("evolve", "--data", data_dir, "--config", small_config, "--seed", 4, "--out", out) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    report = json.loads((out / "report.json").read_text())
    assert report["manifest_hash"] == manifest["hash"]
    assert manifest["config"]["rng_seed"] == 4
    assert manifest["config"]["population_size"] == 60
    assert set(manifest["dataset_files"]) == {"len_003.json", "len_004.json", "len_005.json"}
    assert (out / "best_program.sexp").read_text().startswith(f"; manifest {manifest['hash']}")
    assert (out / "library.txt").exists()
    assert [r["sequence_length"] for r in report["lengths"]] == [3, 4, 5]


def test_evolve_reruns_are_identical(data_dir, small_config, tmp_path):
    for name, workers in (("a", 1), ("b", 2)):
        assert _run("evolve", "--data", data_dir, "--config", small_config, "--out",
                    tmp_path / name, "--workers", workers) == 0
    for fname in ("best_program.sexp", "library.txt"):
        assert (tmp_path / "a" / fname).read_bytes() == (tmp_path / "b" / fname).read_bytes()
    a = _strip_timing(json.loads((tmp_path / "a" / "report.json").read_text()))
    b = _strip_timing(json.loads((tmp_path / "b" / "report.json").read_text()))
    assert a == b


def test_evolve_without_library(data_dir, small_config, tmp_path):
    out = tmp_path / "nolib"
    assert _run("evolve", "--data", data_dir, "--config", small_config, "--no-library", "--out", out) == 0
    assert not (out / "library.txt").exists()
    report = json.loads((out / "report.json").read_text())
    assert report["library"] == [] and report["config"]["use_library"] is False
    assert "fn_" not in report["best_program"]


def test_evolve_max_length_flag(data_dir, small_config, tmp_path):
    out = tmp_path / "short"
    assert _run("evolve", "--data", data_dir, "--config", small_config, "--max-length", 3, "--out", out) == 0
    assert len(json.loads((out / "report.json").read_text())["lengths"]) == 1


@pytest.mark.parametrize("payload", ['{"population_size": 1}', '{"mystery": 2}', "[1, 2]", "{not json"])
def test_evolve_config_errors(tmp_path, payload, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(payload)
    assert _run("evolve", "--config", cfg, "--out", tmp_path / "o") == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_evolve_missing_data(tmp_path):
    assert _run("evolve", "--data", tmp_path / "absent", "--out", tmp_path / "o") == cli.EXIT_DATA
    (tmp_path / "empty").mkdir()
    assert _run("evolve", "--data", tmp_path / "empty", "--out", tmp_path / "o") == cli.EXIT_DATA


def test_internal_errors_exit_four(monkeypatch, tmp_path, small_config, data_dir):
    def boom(*a, **k):
        raise RuntimeError("invariant broken")

    monkeypatch.setattr(cli, "evolve", boom)
    assert _run("evolve", "--data", data_dir, "--config", small_config, "--out", tmp_path) == cli.EXIT_INTERNAL


# -- explain ----------------------------------------------------------------------


@pytest.fixture()
def crafted(tmp_path):
    goal_left = Observation.filled(Cell.EMPTY).with_cells({(1, 0): Cell.GOAL})
    ds = Dataset(2, (((goal_left, Action.LEFT), (Observation.filled(), Action.FORWARD)),))
    save_dataset(ds, tmp_path / "obs.json")
    (tmp_path / "prog.sexp").write_text(f"; hand written\n{GOAL_LEFT_SRC}\n")
    return tmp_path


def test_explain_goal_left_program(crafted):
    out = crafted / "expl.json"
    assert _run("explain", "--program", crafted / "prog.sexp", "--data", crafted / "obs.json",
                "--index", 0, "--out", out) == 0
    first, second = json.loads(out.read_text())
    assert first["action"] == "left"
    assert first["cells"] == [{"x": 1, "y": 0, "compared": "goal-obj", "outcome": True}]
    assert second["action"] == "forward"


def test_explain_render(crafted, capsys):
    assert _run("explain", "--program", crafted / "prog.sexp", "--data", crafted / "obs.json",
                "--render") == 0
    text = capsys.readouterr().out
    assert "step 0 (demonstrated: left)" in text
    assert " . [G] A  .  . " in text


def test_explain_bad_index(crafted, capsys):
    assert _run("explain", "--program", crafted / "prog.sexp", "--data", crafted / "obs.json",
                "--index", 5) == cli.EXIT_DATA
    assert "index 5" in capsys.readouterr().err


def test_explain_bad_program(crafted):
    (crafted / "bad.sexp").write_text("(if_action left-action)\n")
    assert _run("explain", "--program", crafted / "bad.sexp", "--data", crafted / "obs.json") == cli.EXIT_DATA


def test_explain_with_library(crafted):
    (crafted / "lib.txt").write_text("fn_0 = (if_action #0 left-action forward-action)\n")
    (crafted / "p.sexp").write_text("(fn_0 (eq-obj? (get $1 1 0) goal-obj))\n")
    out = crafted / "e.json"
    assert _run("explain", "--program", crafted / "p.sexp", "--library", crafted / "lib.txt",
                "--data", crafted / "obs.json", "--out", out) == 0
    first = json.loads(out.read_text())[0]
    assert first["action"] == "left" and "fn_0" not in first["program"]


# -- report -------------------------------------------------------------------------


def _fake_run(path, accs):
    path.mkdir()
    lengths = [{"sequence_length": 3 + i, "generations": 1, "best_accuracy": b, "union_accuracy": u,
                "best_program": "forward-action", "best_program_expanded": "forward-action",
                "library": [], "wall_clock_seconds": 1.0} for i, (b, u) in enumerate(accs)]
    (path / "report.json").write_text(json.dumps({"lengths": lengths}))
    return path


def test_report_single_run_has_zero_std(tmp_path, capsys):
    run = _fake_run(tmp_path / "r", [(0.9, 1.0), (0.4, 0.6)])
    assert _run("report", run) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "length,metric,mean,std,n_runs"
    assert lines[1] == "3,best_accuracy,0.900000,0.000000,1"
    assert all(line.split(",")[3] == "0.000000" for line in lines[1:])


def test_report_diff(tmp_path):
    lib = [_fake_run(tmp_path / f"lib{i}", [(0.9, 1.0)]) for i in range(2)]
    nolib = [_fake_run(tmp_path / f"nolib{i}", [(0.7, 0.8)]) for i in range(2)]
    out = tmp_path / "diff.csv"
    assert _run("report", *lib, "--diff", *nolib, "--out", out) == 0
    assert out.read_text().splitlines()[1:] == [
        "3,best_accuracy,0.200000,0.000000,2",
        "3,union_accuracy,0.200000,0.000000,2",
    ]


def test_report_errors(tmp_path):
    assert _run("report", tmp_path / "nothing") == cli.EXIT_DATA
    empty = tmp_path / "e"
    empty.mkdir()
    (empty / "report.json").write_text('{"lengths": []}')
    assert _run("report", empty) == cli.EXIT_DATA
