import json

import numpy as np
import pytest

from wforge.bipartite import BipartiteOperator
from wforge.cli import EXIT_DOMAIN, EXIT_IO, EXIT_OK, main, resolve_seed
from wforge.io import OperatorFileError, read_operator, write_operator
from wforge.states import rho_b


def test_round_trip_is_bit_exact(tmp_path, rng):
    X = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    op = BipartiteOperator(X + X.conj().T, 2, 3)
    path = tmp_path / "op.json"
    write_operator(path, op, {"note": "x"})
    back, meta = read_operator(path)
    assert np.array_equal(back.matrix, op.matrix)
    assert back.dims == (2, 3)
    assert meta["note"] == "x" and "ordering" in meta


@pytest.mark.parametrize("content", [
    "not json",
    "[1, 2]",
    json.dumps({"dims": [2, 2], "re": [[1]], "im": [[0]]}),
    json.dumps({"re": [[1]], "im": [[0]]}),
    json.dumps({"dims": [1, 2], "re": [[0, 1], [0, 0]], "im": [[0, 0], [0, 0]]}),
])
def test_malformed_files(tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    with pytest.raises(OperatorFileError):
        read_operator(path)


def test_missing_file(tmp_path):
    with pytest.raises(OperatorFileError):
        read_operator(tmp_path / "missing.json")


def test_seed_resolution(monkeypatch):
    monkeypatch.delenv("WFORGE_SEED", raising=False)
    assert resolve_seed(None) == 0
    assert resolve_seed(7) == 7
    monkeypatch.setenv("WFORGE_SEED", "11")
    assert resolve_seed(None) == 11
    monkeypatch.setenv("WFORGE_SEED", "abc")
    with pytest.raises(OperatorFileError):
        resolve_seed(None)


def test_construct_optimize_detect(tmp_path, capsys):
    w1 = tmp_path / "w1.json"
    assert main(["construct", "--state", "tilde_rho_b:0.5", "--out", str(w1)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "epsilon1 = 0.00085190046" in out
    w = tmp_path / "w.json"
    trace = tmp_path / "trace.csv"
    code = main(["optimize", "--witness", str(w1), "--mode", "edge", "--out", str(w),
                 "--trace", str(trace)])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "zero set size = 8" in out and "zero set span = 8" in out
    assert trace.read_text().splitlines()[0] == "iteration,lambda,floor,zero_set_size"
    assert main(["detect", "--witness", str(w), "--state", "tilde_rho_b:0.5", "--via-map"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "witness: detected" in out and "map: detected" in out


def test_construct_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert main(["construct", "--state", "tilde_rho_b:0.3", "--out", str(p), "--seed", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_construct_from_separable_state_is_domain_error(tmp_path, capsys):
    code = main(["construct", "--state", "rho_b:0", "--out", str(tmp_path / "w.json")])
    assert code == EXIT_DOMAIN
    assert "not edge" in capsys.readouterr().err


def test_io_errors_exit_one(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert main(["construct", "--state", str(bad), "--out", str(tmp_path / "w.json")]) == EXIT_IO
    assert main(["construct", "--state", "rho_b:x", "--out", str(tmp_path / "w.json")]) == EXIT_IO


def test_detect_rejects_psd_witness_file(tmp_path):
    p = tmp_path / "id.json"
    write_operator(p, BipartiteOperator(np.eye(8) / 8, 2, 4))
    assert main(["detect", "--witness", str(p), "--state", "rho_b:0.5"]) == EXIT_DOMAIN


def test_bsa_command(tmp_path, capsys):
    out = tmp_path / "bsa"
    assert main(["bsa", "--state", "tilde_rho_b:0.5", "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["p"] == 1.0 and summary["terms"] == []
    assert (out / "delta.json").exists()

    rng = np.random.default_rng(0)
    from wforge.states import random_separable, tilde_rho_b

    sep, _ = random_separable(rng, 20, 2, 4)
    mix = tmp_path / "mix.json"
    write_operator(mix, sep * 0.5 + tilde_rho_b(0.5) * 0.5)
    assert main(["bsa", "--state", str(mix), "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["reconstruction_error"] < 1e-8

    npt = tmp_path / "npt.json"
    bell = np.zeros(8)
    bell[0] = bell[5] = 1 / np.sqrt(2)
    write_operator(npt, BipartiteOperator(np.outer(bell, bell), 2, 4))
    assert main(["bsa", "--state", str(npt), "--out", str(out)]) == EXIT_DOMAIN
    assert "not PPT" in capsys.readouterr().err


def test_state_spec_parsing():
    from wforge.cli import load_state

    op, meta = load_state("rho_b:0.5")
    assert np.array_equal(op.matrix, rho_b(0.5).matrix)
    assert meta["source"] == "rho_b:0.5"


def test_tolerance_failure_exits_three(tmp_path, monkeypatch, capsys):
    import wforge.cli as cli
    from wforge.states import bsa_decompose

    def sloppy(rho, cfg):
        res = bsa_decompose(rho, cfg)
        return res.__class__(**{**res.__dict__, "reconstruction_error": 1e-3})

    monkeypatch.setattr(cli, "bsa_decompose", sloppy)
    code = main(["bsa", "--state", "tilde_rho_b:0.5", "--out", str(tmp_path / "o")])
    assert code == cli.EXIT_TOLERANCE
    assert "tolerance failure" in capsys.readouterr().err
