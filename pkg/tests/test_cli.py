import json

import pytest

from iosrates import cli, dgp, dist


def run(argv, capsys):
    code = cli.run([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_specs_list(capsys):
    code, out, _ = run(["specs", "list"], capsys)
    assert code == 0
    assert "gaussian_boundary" in out.split()
    code, out, _ = run(["specs", "show", "cubic_support"], capsys)
    assert json.loads(out)["id"] == "cubic_support"


def test_ios_extract(worked_csv, capsys):
    code, out, _ = run(["ios", "extract", "--input", worked_csv, "--x0", "0", "--k", 4], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["s_n"] == [[0.0], [1.0], [3.0], [8.0]]
    assert doc["iota"] == [2, 4, 5, 9]


def test_rdd_test(worked_csv, capsys):
    _, out, _ = run(["rdd", "test", "--input", worked_csv, "--q", 2, "--pooled"], capsys)
    doc = json.loads(out)
    assert doc["statistic"] == 0.375
    assert doc["p_value"] == pytest.approx(1 / 3)
    _, out, _ = run(["rdd", "test", "--input", worked_csv, "--q", 2], capsys)
    assert json.loads(out)["statistic"] == 0.125


def test_knn_estimate(worked_csv, capsys):
    _, out, _ = run(["knn", "estimate", "--input", worked_csv, "--k", 4], capsys)
    assert json.loads(out)["estimate"] == [3.0]
    _, out, _ = run(["knn", "estimate", "--input", worked_csv, "--k", 4, "--stat", "quantile:0.5"],
                    capsys)
    assert json.loads(out)["estimate"] == [1.0]


def test_dist_commands(capsys):
    _, out, _ = run(["dist", "marginal", "--spec", "gaussian_boundary", "--r", 0.2, "--metric", "tv"],
                    capsys)
    ref = dist.marginal_distance(dgp.get_spec("gaussian_boundary"), 0.2, "tv").value
    assert json.loads(out)["value"] == ref
    _, out, _ = run(["dist", "joint", "--spec", "holder_boundary_k1", "--n", 200, "--k", 8], capsys)
    assert json.loads(out)["method"] != "upper_bound"
    _, out, _ = run(["dist", "joint", "--spec", "holder_boundary_k1", "--n", 200, "--k", 8,
                     "--bound"], capsys)
    assert json.loads(out)["method"] == "upper_bound"


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["specs", "show", "no_such_spec"],
    ["dist", "marginal", "--spec", "gaussian_boundary"],
    ["ios", "extract", "--input", "/does/not/exist.csv", "--x0", "0", "--k", "1"],
    ["rdd", "test", "--bogus"],
    ["dist", "joint", "--spec", "gaussian_boundary", "--n", "100", "--k", "5"],
])
def test_invalid_input_exit_code(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err


def test_manifest_and_replay(tmp_path, capsys):
    out = tmp_path / "sim.csv"
    argv = ["rdd", "simulate", "--left", "holder_boundary_k1", "--n", 300, "--reps", 20,
            "--perms", 99, "--seed", 7, "--threads", 4, "--out", out]
    assert run(argv, capsys)[0] == 0
    first = out.read_bytes()
    manifest = json.loads((tmp_path / "sim.csv.manifest.json").read_text())
    assert manifest["seed"] == 7
    assert set(manifest["versions"]) >= {"numpy", "scipy", "python"}
    assert manifest["wall_time_s"] >= 0
    out.unlink()
    config = tmp_path / "replay.json"
    config.write_text(json.dumps(manifest))
    assert run(["--config", config], capsys)[0] == 0
    assert out.read_bytes() == first
    # thread count does not change the results
    doc = manifest["config"]
    doc["threads"] = 1
    config.write_text(json.dumps(doc))
    assert run(["--config", config], capsys)[0] == 0
    assert out.read_bytes() == first


def test_config_rejects_unknown_fields(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"command": ["specs", "list"], "colour": "red"}))
    assert run(["--config", config], capsys)[0] == 2


def test_output_dir_env(tmp_path, worked_csv, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUT_DIR_ENV, str(tmp_path))
    assert run(["knn", "estimate", "--input", worked_csv, "--k", 4], capsys)[0] == 0
    assert (tmp_path / "knn_estimate.json").exists()
    assert (tmp_path / "knn_estimate.json.manifest.json").exists()
