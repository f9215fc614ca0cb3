import json
import math

import pytest

from upb_locc.cli import main


@pytest.fixture
def files(tmp_path):
    def make(*argv):
        assert main(list(argv)) == 0
    return tmp_path, make


def run_json(capsys, *argv):
    capsys.readouterr()
    code = main(list(argv) + ["--json"])
    out = capsys.readouterr().out
    return code, json.loads(out)["body"]


def test_construct_counts(files):
    tmp, make = files
    make("construct", "--family", "paper5x5", "--out", str(tmp / "p5.json"))
    make("construct", "--family", "gentiles", "--d", "4", "--out", str(tmp / "g4.json"))
    assert len(json.loads((tmp / "p5.json").read_text())["states"]) == 17
    assert len(json.loads((tmp / "g4.json").read_text())["states"]) == 9


@pytest.mark.parametrize("argv", [["--family", "odd", "--d", "4"], ["--family", "gentiles", "--d", "5"], ["--family", "odd"]])
def test_construct_rejects_bad_dimension(tmp_path, argv):
    assert main(["construct", *argv, "--out", str(tmp_path / "x.json")]) == 2


def test_verify_paper5x5(files, capsys):
    tmp, make = files
    make("construct", "--family", "paper5x5", "--out", str(tmp / "p5.json"))
    code, body = run_json(capsys, "verify", str(tmp / "p5.json"), "--ppt", "--report", str(tmp / "r.json"))
    assert code == 0
    assert body["orthogonal"] is True and body["unextendible"] is True
    assert body["complement_rank"] == 8 and body["ppt"]["is_ppt"] is True
    assert json.loads((tmp / "r.json").read_text())["body"] == body


def test_verify_duplicate_state_fails(files, capsys):
    tmp, make = files
    make("construct", "--family", "paper5x5", "--out", str(tmp / "p5.json"))
    o = json.loads((tmp / "p5.json").read_text())
    o["states"][1].update(alice=o["states"][0]["alice"], bob=o["states"][0]["bob"])
    (tmp / "dup.json").write_text(json.dumps(o))
    code, body = run_json(capsys, "verify", str(tmp / "dup.json"))
    assert code == 1 and body["orthogonal"] is False
    assert body["failing_pair"] == ["phi1", "phi2"]


def test_verify_skips_large_search(files, capsys):
    tmp, make = files
    make("construct", "--family", "odd", "--d", "9", "--out", str(tmp / "o9.json"))
    code, body = run_json(capsys, "verify", str(tmp / "o9.json"))
    assert code == 0 and body["unextendible"] == "skipped"


def test_verify_branch_and_bound_mode(files, capsys):
    tmp, make = files
    make("construct", "--family", "odd", "--d", "7", "--out", str(tmp / "o7.json"))
    code, body = run_json(capsys, "verify", str(tmp / "o7.json"), "--unextendible-mode", "branch_and_bound")
    assert code == 0 and body["unextendible"] is True and body["search"]["mode"] == "branch_and_bound"


def test_verify_dropped_stopper_gives_witness(files, capsys):
    tmp, make = files
    make("construct", "--family", "paper5x5", "--out", str(tmp / "p5.json"))
    o = json.loads((tmp / "p5.json").read_text())
    o["states"].pop()
    (tmp / "nostop.json").write_text(json.dumps(o))
    code, body = run_json(capsys, "verify", str(tmp / "nostop.json"))
    assert code == 1 and body["unextendible"] is False
    assert body["witness"]["max_overlap"] < 1e-9


def test_verify_parse_errors_exit_2(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    assert main(["verify", str(tmp_path / "bad.json")]) == 2
    assert main(["verify", str(tmp_path / "missing.json")]) == 2


@pytest.mark.parametrize(
    "theorem,d,dims,arity",
    [(1, None, [3], 3), (2, None, [2, 2], 2), (5, 6, [2, 2], None), (3, 5, [3], None)],
)
def test_build_protocol_resources(tmp_path, theorem, d, dims, arity):
    argv = ["build-protocol", "--theorem", str(theorem), "--out", str(tmp_path / "t.json")]
    if d is not None:
        argv += ["--d", str(d)]
    assert main(argv) == 0
    o = json.loads((tmp_path / "t.json").read_text())
    assert [c["dim"] for c in o["resource"]] == dims
    if arity is not None:
        assert len(o["tree"]["children"]) == arity


def test_build_protocol_rejects_parity(tmp_path):
    assert main(["build-protocol", "--theorem", "3", "--d", "4", "--out", str(tmp_path / "t.json")]) == 2
    assert main(["build-protocol", "--theorem", "5", "--d", "5", "--out", str(tmp_path / "t.json")]) == 2


@pytest.mark.parametrize("theorem,ebits", [(1, math.log2(3)), (2, 2.0)])
def test_run_paper5x5(files, capsys, theorem, ebits):
    tmp, make = files
    make("construct", "--family", "paper5x5", "--out", str(tmp / "p5.json"))
    make("build-protocol", "--theorem", str(theorem), "--out", str(tmp / "t.json"))
    code, body = run_json(capsys, "run", str(tmp / "p5.json"), str(tmp / "t.json"), "--report", str(tmp / "r.json"))
    assert code == 0 and body["perfect"] is True
    assert body["ebits"] == pytest.approx(ebits, abs=1e-12)
    assert all(s["success"] == pytest.approx(1.0, abs=1e-7) for s in body["states"].values())


def test_run_product_control_not_perfect(files, capsys):
    tmp, make = files
    make("construct", "--family", "paper5x5", "--out", str(tmp / "p5.json"))
    make("build-protocol", "--theorem", "1", "--out", str(tmp / "t.json"))
    code, body = run_json(capsys, "run", str(tmp / "p5.json"), str(tmp / "t.json"), "--product-control")
    assert code == 1 and body["perfect"] is False and body["failure_paths"]


def test_run_with_edited_resource_dims_exits_2(files):
    tmp, make = files
    make("construct", "--family", "paper5x5", "--out", str(tmp / "p5.json"))
    make("build-protocol", "--theorem", "1", "--out", str(tmp / "t.json"))
    o = json.loads((tmp / "t.json").read_text())
    o["resource"][0]["dim"] = 2
    (tmp / "t2.json").write_text(json.dumps(o))
    assert main(["run", str(tmp / "p5.json"), str(tmp / "t2.json")]) == 2


def test_run_layout_mismatch_exits_2(files):
    tmp, make = files
    make("construct", "--family", "odd", "--d", "3", "--out", str(tmp / "o3.json"))
    make("build-protocol", "--theorem", "1", "--out", str(tmp / "t.json"))
    assert main(["run", str(tmp / "o3.json"), str(tmp / "t.json")]) == 2


def test_run_invalid_tree_exits_1(files, capsys):
    tmp, make = files
    make("construct", "--family", "paper5x5", "--out", str(tmp / "p5.json"))
    make("build-protocol", "--theorem", "1", "--out", str(tmp / "t.json"))
    o = json.loads((tmp / "t.json").read_text())
    o["tree"]["party"] = "Bob"
    (tmp / "t3.json").write_text(json.dumps(o))
    code, body = run_json(capsys, "run", str(tmp / "p5.json"), str(tmp / "t3.json"))
    assert code == 1 and body["valid"] is False
    assert body["violations"][0]["kind"] == "ownership"


def test_reports_are_deterministic(files, capsys):
    tmp, make = files
    make("construct", "--family", "odd", "--d", "5", "--out", str(tmp / "o5.json"))
    make("build-protocol", "--theorem", "4", "--d", "5", "--out", str(tmp / "t.json"))
    a = run_json(capsys, "run", str(tmp / "o5.json"), str(tmp / "t.json"))
    b = run_json(capsys, "run", str(tmp / "o5.json"), str(tmp / "t.json"))
    assert a == b and a[0] == 0


def test_tiles(capsys):
    assert main(["tiles", "--family", "paper5x5"]) == 0
    fancy = capsys.readouterr().out
    assert main(["tiles", "--family", "gentiles", "--d", "4", "--plain"]) == 0
    plain = capsys.readouterr().out
    assert "1: row 0, span 0..3 -> phi1, phi2, phi3" in fancy and "┌" in fancy
    assert "3: row 2, span 3..0 -> V1_2" in plain
    assert all(ord(ch) < 128 for ch in plain)
    assert main(["tiles", "--family", "odd", "--d", "6"]) == 2


def test_complement(files, capsys, tmp_path):
    tmp, make = files
    make("construct", "--family", "odd", "--d", "3", "--out", str(tmp / "o3.json"))
    code, body = run_json(capsys, "complement", str(tmp / "o3.json"), "--out", str(tmp / "rho.json"))
    assert code == 0 and body["complement_rank"] == 4 and body["ppt"]["is_ppt"]
    rho = json.loads((tmp / "rho.json").read_text())
    assert rho["dims"] == [3, 3]
    assert sum(rho["matrix"][i][i][0] for i in range(9)) == pytest.approx(1.0)


def test_usage_errors():
    assert main([]) == 2
    assert main(["verify"]) == 2
    assert main(["construct", "--family", "paper5x5", "--out", "x", "--tol", "-1"]) == 2
    assert main(["--version"]) == 0
