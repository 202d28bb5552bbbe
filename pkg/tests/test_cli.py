import pytest

from mcl import treeio
from mcl.cli import main


def test_gen_build_query_roundtrip(tmp_path, capsys):
    data, tree = tmp_path / "d.txt", tmp_path / "t.mct"
    assert main(["gen-data", "--kind", "hamming", "--d", "20", "--n", "300", "--seed", "4", "--out", str(data)]) == 0
    assert main(["build", str(data), "--strategy", "ball", "--b", "8", "--out", str(tree)]) == 0
    first = tree.read_bytes()
    assert main(["build", str(data), "--strategy", "ball", "--b", "8", "--out", str(tree)]) == 0
    assert tree.read_bytes() == first
    capsys.readouterr()
    assert main(["query", str(data), str(tree), "--random", "5", "--point", "1" * 20]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("query,index") and len(out) == 7
    assert main(["query", str(data), str(tree), "--random", "3", "--radius", "0.3", "--out", str(tmp_path / "q.csv")]) == 0
    assert len((tmp_path / "q.csv").read_text().splitlines()) == 4


def test_binary_data(tmp_path):
    data, tree = tmp_path / "d.bin", tmp_path / "t.mct"
    assert main(["gen-data", "--kind", "unit-cube", "--d", "3", "--n", "100", "--binary", "--out", str(data)]) == 0
    assert main(["build", str(data), "--out", str(tree)]) == 0
    assert main(["query", str(data), str(tree), "--point", "0.5,0.5,0.5"]) == 0


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as err:
        main(["frobnicate"])
    assert err.value.code == 2
    assert main(["report", str(tmp_path)]) == 2
    assert main(["run", str(tmp_path / "nope.ini")]) == 2
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nkind = nope\n")
    assert main(["run", str(bad)]) == 2
    assert "experiment.kind" in capsys.readouterr().err


def test_query_needs_points(tmp_path):
    data, tree = tmp_path / "d.txt", tmp_path / "t.mct"
    main(["gen-data", "--d", "8", "--n", "20", "--out", str(data)])
    main(["build", str(data), "--out", str(tree)])
    assert main(["query", str(data), str(tree)]) == 2
    assert main(["query", str(data), str(tree), "--point", "101"]) == 2


def test_run_and_report(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[experiment]\nkind = concentration\n[domain]\ndims = 30\n[concentration]\nsamples = 2000\n")
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--out", str(out), "--seed", "2", "--threads", "2"]) == 0
    assert main(["report", str(out)]) == 0
    assert "checks passed" in capsys.readouterr().out


def test_report_exit_one_on_failed_assertion(tmp_path):
    cfg = tmp_path / "c.ini"
    # tiny n saturates immediately, so the strict trend cannot hold
    cfg.write_text(
        "[experiment]\nkind = curse_sweep\n[domain]\ndims = 40, 60\n[data]\nn = 40\n[tree]\nb = 16\n[queries]\ncount = 20\n"
    )
    assert main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert main(["report", str(tmp_path / "o")]) == 1
