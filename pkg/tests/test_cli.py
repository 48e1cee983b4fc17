from __future__ import annotations

import json

import pytest

from monoerasure.cli import main
from trees import FIVE_NODE, FIVE_NODE_QUORUMS, MIXED_DEPTH, SHARED_LEAF


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def test_params_lp(files, capsys):
    assert main(["params", "--tree", files("t", FIVE_NODE)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == ["k=5 m=7 beta=2/5 q=7", "per_node a=2 b=2 c=1 d=1 e=1", "objective=7/5"]


def test_params_methods(files, capsys):
    tree = files("t", MIXED_DEPTH)
    assert main(["params", "--tree", tree, "--method", "uniform"]) == 0
    assert capsys.readouterr().out.startswith("k=2 m=5 beta=3/2")
    assert main(["params", "--tree", tree, "--method", "optimal", "--json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["beta"] == "1" and report["method"] == "optimal"


def test_params_rejects_bad_input(files, capsys):
    assert main(["params", "--tree", files("t", "(3 a b)")]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["params", "--tree", files("t", SHARED_LEAF), "--method", "optimal"]) == 2
    assert main(["params", "--tree", "/nonexistent/tree"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["params"])
    assert exc.value.code == 2


def test_build_and_check(files, tmp_path, capsys):
    out = str(tmp_path / "code.json")
    assert main(["build", "--tree", files("t", SHARED_LEAF), "--method", "kronecker",
                 "--out", out]) == 0
    manifest = json.loads(open(out).read())
    assert set(manifest) == {"format", "tool", "inputs", "params", "code"}
    assert manifest["params"]["k"] == 12
    capsys.readouterr()
    assert main(["check", "--code", out]) == 0
    assert capsys.readouterr().out.strip() == "complete: 14 access sets verified"
    assert main(["check", "--code", out, "--tree", files("t2", "(8 p1 p2 p3 p4 p5 p6 p7 p8)")]) == 0
    assert main(["check", "--code", out, "--tree", files("t3", "(1 p1 p2 p3 p4 p5 p6 p7 p8)")]) == 3
    assert "insufficient: {p1}" in capsys.readouterr().out


def test_encode_decode_round_trip(files, tmp_path, capsys):
    code = str(tmp_path / "code.json")
    main(["build", "--tree", files("t", FIVE_NODE), "--out", code])
    data = bytes(range(256)) * 3 + b"tail"
    src = tmp_path / "in.bin"
    src.write_bytes(data)
    frags = str(tmp_path / "frags")
    assert main(["encode", "--code", code, "--file", str(src), "--out", frags]) == 0
    for nodes in ("a,b,c", "b,c,d,e", None):
        out = tmp_path / f"out-{nodes}.bin"
        argv = ["decode", "--code", code, "--fragments", frags, "--out", str(out)]
        if nodes:
            argv += ["--nodes", nodes]
        assert main(argv) == 0
        assert out.read_bytes() == data
    capsys.readouterr()
    assert main(["decode", "--code", code, "--fragments", frags, "--nodes", "c,d",
                 "--out", str(tmp_path / "x")]) == 3
    assert capsys.readouterr().out.strip() == "insufficient"


def test_decode_rejects_foreign_fragments(files, tmp_path):
    code_a = str(tmp_path / "a.json")
    code_b = str(tmp_path / "b.json")
    main(["build", "--tree", files("t", FIVE_NODE), "--out", code_a])
    main(["build", "--tree", files("t2", FIVE_NODE), "--method", "kronecker", "--out", code_b])
    src = tmp_path / "in.bin"
    src.write_bytes(b"hello")
    main(["encode", "--code", code_a, "--file", str(src), "--out", str(tmp_path / "f")])
    assert main(["decode", "--code", code_b, "--fragments", str(tmp_path / "f"),
                 "--out", str(tmp_path / "o")]) == 2


def test_systems(files, capsys):
    path = files("q.json", json.dumps({"threshold": {"n": 4, "f": 1}}))
    assert main(["systems", "--quorum", path]) == 0
    out = capsys.readouterr().out
    assert "kernels (6)" in out and "reliable (4)" in out
    assert main(["systems", "--quorum", files("q2.json", json.dumps(FIVE_NODE_QUORUMS)),
                 "--json"]) == 0
    desc = json.loads(capsys.readouterr().out)
    assert len(desc["kernels"]) == 9 and len(desc["reliable"]) == 7


def test_sim_and_sweep(files, tmp_path, capsys):
    scenario = files("s.json", json.dumps({
        "quorum": {"threshold": {"n": 4, "f": 1}}, "dealer": "p1",
        "corrupt": ["p3"], "behaviors": {"p3": "equivocate"}, "seed": 1,
    }))
    transcript = tmp_path / "t.jsonl"
    assert main(["sim", "--scenario", scenario, "--transcript", str(transcript)]) == 0
    assert capsys.readouterr().out.strip().endswith("stored: 3/3")
    first = json.loads(transcript.read_text().splitlines()[0])
    assert list(first) == ["step", "from", "to", "kind", "D_prefix_8hex", "dropped"]
    assert main(["sim", "--scenario", scenario, "--seeds", "5"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["runs"] == 5 and report["violations"] == []


def test_sim_rejects_bad_scenario(files):
    bad = files("s.json", json.dumps({"quorum": {"threshold": {"n": 4, "f": 1}},
                                      "dealer": "p1", "corrupt": ["p2", "p3"]}))
    assert main(["sim", "--scenario", bad]) == 2
