import json
import subprocess
import sys

import numpy as np
import pytest

from frechetbox import bench
from frechetbox.cli import main
from frechetbox.generators import perturbed_copy, random_walk, zigzag
from frechetbox.io import CurveFormatError, parse_curve, parse_curve_text, write_curve


@pytest.fixture
def curves(tmp_path):
    tau = tmp_path / "tau.txt"
    sigma = tmp_path / "sigma.txt"
    tau.write_text("2 2\n0 0\n1 0\n")
    sigma.write_text("# two parallel segments\n2 2\n0 1\n1 1  # end\n")
    return str(tau), str(sigma)


def test_parse_text_and_json():
    c = parse_curve_text("3 2\n0 0 0\n1 2 3\n")
    assert c.dim == 3 and len(c) == 2
    j = parse_curve_text('{"dim": 2, "vertices": [[0, 0], [1, 1]]}')
    assert j.vertices.tolist() == [[0.0, 0.0], [1.0, 1.0]]


@pytest.mark.parametrize(
    "text,needle",
    [
        ("", "empty"),
        ("2\n0 0\n", ":1:"),
        ("2 2\n0 0\n1\n", ":3: expected 2"),
        ("2 2\n0 0\n1 x\n", ":3: malformed"),
        ("2 1\n0 0\n1 1\n", "more vertices"),
        ("2 3\n0 0\n1 1\n", "declares 3"),
        ('{"vertices": [[0, 0], [1]]}', "dimension"),
        ("{nope", "invalid JSON"),
    ],
)
def test_parse_errors(text, needle):
    with pytest.raises(CurveFormatError, match=needle.replace("(", r"\(")):
        parse_curve_text(text, "f")


def test_write_round_trip(tmp_path):
    c = random_walk(7, dim=3, seed=1)
    for fmt in ("text", "json"):
        path = tmp_path / f"c.{fmt}"
        write_curve(c, path, fmt)
        assert np.array_equal(parse_curve(path).vertices, c.vertices)


def test_generators_seeded():
    a, b = random_walk(10, seed=3), random_walk(10, seed=3)
    assert np.array_equal(a.vertices, b.vertices)
    steps = np.linalg.norm(np.diff(a.vertices, axis=0), axis=1)
    assert np.allclose(steps, 1.0)
    assert np.abs(perturbed_copy(a, 0.0, seed=0).vertices - a.vertices).max() == 0
    z = zigzag(5)
    assert z.vertices[:, 1].tolist() == [1, -1, 1, -1, 1]


def test_decide_exit_codes(curves, capsys):
    tau, sigma = curves
    assert main(["decide", tau, sigma, "--delta", "1.0"]) == 0
    assert capsys.readouterr().out.strip() == "true"
    assert main(["decide", tau, sigma, "--delta", "0.5", "--engine", "boxed"]) == 1
    assert capsys.readouterr().out.strip() == "false"


def test_decide_debug_table(curves, capsys):
    tau, sigma = curves
    main(["decide", tau, sigma, "--delta", "1.0", "--debug-table"])
    lines = capsys.readouterr().out.splitlines()
    table = json.loads(lines[1])
    assert table["rows"][0] == [[0.0, 0.0]]


def test_input_errors(tmp_path, curves, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 2\n0 0\n")
    assert main(["decide", str(bad), curves[1], "--delta", "1"]) == 2
    assert "declares 2" in capsys.readouterr().err
    assert main(["decide", str(tmp_path / "missing"), curves[1], "--delta", "1"]) == 2
    assert main(["decide", *curves, "--delta", "-1"]) == 2


def test_compute_and_discrete(curves, capsys):
    assert main(["compute", *curves, "--exact"]) == 0
    assert capsys.readouterr().out.strip() == "1.0"
    assert main(["compute", *curves, "--json", "--engine", "boxed"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["value"] - 1.0) <= 1e-9 and out["mode"] == "bisection"
    assert main(["discrete", *curves]) == 0
    assert capsys.readouterr().out.strip() == "1.0"


def test_memo_persist(tmp_path, capsys):
    tau, sigma = tmp_path / "t.txt", tmp_path / "s.txt"
    write_curve(random_walk(30, seed=1), tau)
    write_curve(perturbed_copy(parse_curve(tau), 0.1, seed=2), sigma)
    memo = tmp_path / "memo.bin"
    args = ["decide", str(tau), str(sigma), "--delta", "0.5", "--engine", "boxed", "--alpha", "3",
            "--theta", "2", "--memo-persist", str(memo)]
    first = main(args)
    assert memo.exists()
    capsys.readouterr()
    assert main(args) == first
    assert "misses=0" in capsys.readouterr().err
    args[args.index("3")] = "4"
    assert main(args) == 2


def test_sig_dump(curves, tmp_path, capsys):
    svg = tmp_path / "fs.svg"
    assert main(["sig-dump", *curves, "--delta", "1.0", "--format", "json", "--svg", str(svg)]) == 0
    dump = json.loads(capsys.readouterr().out)
    assert dump["col_signatures"][0]["ranks"] == [[1, 2, 3, 4]]
    assert svg.read_text().startswith("<svg")


def test_gen(tmp_path, capsys):
    out = tmp_path / "w.txt"
    assert main(["gen", "walk", "--n", "5", "--seed", "4", "--out", str(out)]) == 0
    assert len(parse_curve(out)) == 5
    assert main(["gen", "perturb", "--input", str(out), "--noise", "0.01"]) == 0
    assert capsys.readouterr().out.startswith("2 5")
    assert main(["gen", "perturb"]) == 2


def test_bench_deterministic(capsys):
    args = ["bench", "--n", "40", "--instances", "2", "--seed", "5", "--alpha", "3", "--theta", "2"]
    assert main(args) == 0
    a = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == a
    assert "all_agree=true" in a


def test_bench_mismatch_exit(monkeypatch, capsys):
    from frechetbox.freespace import DecisionResult

    monkeypatch.setattr(bench, "boxed_decide", lambda *a, **k: DecisionResult(
        not bench.naive_decide(*a[:3]).reachable, stats={"boxes": 0, "hits": 0, "misses": 0}))
    assert main(["bench", "--n", "10", "--instances", "1"]) == 3
    assert "mismatch" in capsys.readouterr().err


def test_module_entry_point(curves):
    proc = subprocess.run([sys.executable, "-m", "frechetbox", "decide", *curves, "--delta", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "true"


def test_duplicate_vertex_rejected():
    with pytest.raises(CurveFormatError, match="f"):
        parse_curve_text("2 3\n0 0\n1 1\n1 1\n", "f")


def test_compute_translated_pair(tmp_path, capsys):
    c = random_walk(12, seed=9)
    shift = np.array([0.3, -0.4])
    write_curve(c, tmp_path / "a.txt")
    write_curve(c.vertices + shift, tmp_path / "b.txt")
    assert main(["compute", str(tmp_path / "a.txt"), str(tmp_path / "b.txt"), "--eps", "1e-9"]) == 0
    assert abs(float(capsys.readouterr().out) - 0.5) <= 1e-9


def test_decide_identical_zero_delta(tmp_path, capsys):
    write_curve(random_walk(9, seed=2), tmp_path / "a.txt")
    a = str(tmp_path / "a.txt")
    assert main(["decide", a, a, "--delta", "0"]) == 0
    assert capsys.readouterr().out.strip() == "true"
