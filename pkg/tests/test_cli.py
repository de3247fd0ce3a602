from pathlib import Path

import pytest

from suget.cli import main
from suget.newick import parse_newick, read_newick_file

DATA = Path(__file__).parent / "data"
SPECIES = str(DATA / "species.nwk")


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_correct_tsv_golden(capsys):
    code, out, _ = run(capsys, "correct", SPECIES, DATA / "batch.nwk", "--mode=trs", "--report=tsv")
    assert code == 0
    rows = [line.split("\t")[:-1] for line in out.strip().splitlines()]
    expected = [line.split("\t") for line in (DATA / "batch.expected.tsv").read_text().strip().splitlines()]
    assert rows == expected
    assert out.splitlines()[0].endswith("\tmillis")


def test_check(capsys, tmp_path):
    code, out, _ = run(capsys, "check", DATA / "inputs.nwk")
    assert code == 0 and out.strip().endswith(";")
    code, _, err = run(capsys, "check", DATA / "conflict.nwk")
    assert code == 1 and "{a,b,c}" in err


def test_minsgt_output(capsys):
    code, out, err = run(capsys, "minsgt", SPECIES, DATA / "inputs.nwk", "--stats")
    assert code == 0
    tree, cost = out.strip().splitlines()
    assert parse_newick(tree).nodes[0].annotations["Ev"] in ("Dup", "Spec")
    assert cost == "cost=1+3=4"
    assert err.startswith("stats ") and "memo_size=" in err
    code, out, _ = run(capsys, "minsgt", SPECIES, DATA / "inputs.nwk", "--core")
    assert code == 0 and out.strip().splitlines()[1] == "cost=1+3=4"


def test_oracle_agrees(capsys, tmp_path):
    code, _, err = run(capsys, "minlsgt", SPECIES, DATA / "inputs.nwk")
    assert code == 1 and "label" in err
    code, _, _ = run(capsys, "oracle", SPECIES, DATA / "inputs.nwk", "--mode=lsgt")
    assert code == 1
    # LCA labels of these two trees clash at their shared root split
    _, out, _ = run(capsys, "reconcile", SPECIES, DATA / "inputs.nwk")
    relabeled = tmp_path / "relabeled.nwk"
    relabeled.write_text("\n".join(out.splitlines()[0::2]) + "\n")
    assert run(capsys, "minlsgt", SPECIES, relabeled)[0] == 1
    assert run(capsys, "oracle", SPECIES, relabeled, "--mode=lsgt")[0] == 1
    code, solver, _ = run(capsys, "minlsgt", SPECIES, DATA / "labeled.nwk")
    assert code == 0
    code, brute, _ = run(capsys, "oracle", SPECIES, DATA / "labeled.nwk", "--mode=lsgt")
    assert code == 0
    assert solver.splitlines()[1] == brute.splitlines()[1]


def test_max_k_refusal(capsys):
    code, _, err = run(capsys, "minsgt", SPECIES, DATA / "inputs.nwk", "--max-k", "1")
    assert code == 2 and "4^k/2-1" in err


def test_max_k_from_env(capsys, monkeypatch):
    monkeypatch.setenv("SUGET_MAX_K", "1")
    code, _, _ = run(capsys, "minsgt", SPECIES, DATA / "inputs.nwk")
    assert code == 2


def test_inconsistent_input_exit_1(capsys):
    code, _, err = run(capsys, "minsgt", SPECIES, DATA / "conflict_species.nwk")
    assert code == 1 and "error" in err


def test_parse_errors_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.nwk"
    bad.write_text("((a__human,b__rat);\n")
    code, _, err = run(capsys, "reconcile", SPECIES, bad)
    assert code == 2 and "bad.nwk" in err
    code, _, err = run(capsys, "reconcile", SPECIES, tmp_path / "missing.nwk")
    assert code == 2


def test_batch_failure_isolated(capsys, tmp_path):
    genes = tmp_path / "g.nwk"
    genes.write_text("(a__human,b__rat)[&&NHX:Ev=Dup];\n(a__rat,b__rat)[&&NHX:Ev=Spec];\n"
                     "(a__human,b__mouse);\n")
    code, out, err = run(capsys, "reconcile", SPECIES, genes, "--labels")
    assert code == 1
    assert "tree 2" in err
    assert len(out.strip().splitlines()) == 4


def test_mintrs_batch(capsys):
    code, out, _ = run(capsys, "mintrs", SPECIES, DATA / "batch.nwk")
    assert code == 0
    assert [line for line in out.splitlines() if line.startswith("cost=")] == [
        "cost=1+0=1", "cost=0+0=0", "cost=2+1=3"]


def test_gen_and_bench(capsys, tmp_path):
    prefix = tmp_path / "inst"
    code, out, _ = run(capsys, "gen", "--seed", 5, "--genes", 7, "--k", 3, "--prefix", prefix)
    assert code == 0 and len(out.splitlines()) == 4
    first = (tmp_path / "inst.inputs.nwk").read_text()
    run(capsys, "gen", "--seed", 5, "--genes", 7, "--k", 3, "--prefix", prefix)
    assert (tmp_path / "inst.inputs.nwk").read_text() == first
    assert len(read_newick_file(tmp_path / "inst.inputs.nwk")) == 3
    code, out, _ = run(capsys, "minsgt", tmp_path / "inst.species.nwk", tmp_path / "inst.inputs.nwk")
    assert code == 0
    code, out, _ = run(capsys, "bench", "scaling", "--sizes", 40, 80)
    assert code == 0 and len(out.splitlines()) == 3
    code, out, _ = run(capsys, "bench", "correct", "--count", 3, "--genes", 6)
    assert code == 0 and len(out.splitlines()) == 4
