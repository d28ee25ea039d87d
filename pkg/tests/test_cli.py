import json

import numpy as np
import pytest

from complexflow import io, suites
from complexflow.cli import main
from complexflow.symbols import SymbolField


def test_table_markdown(capsys):
    assert main(["table", "annb1", "--t", "0.25"]) == 0
    out = capsys.readouterr().out
    assert "free ev." in out and "MISMATCH" in out


def test_table_json(capsys):
    assert main(["table", "annb2", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["table"] == "annb2" and len(data["rows"]) == 2


def test_table_inadmissible_t_is_usage_error(capsys):
    assert main(["table", "annb1", "--t", "0.6"]) == 2
    assert "inadmissible" in capsys.readouterr().err


def test_unknown_suite_is_usage_error():
    assert main(["verify", "--suite", "nonsense"]) == 2


def test_missing_file_is_usage_error(tmp_path):
    assert main(["propagate", str(tmp_path / "missing.json")]) == 2


def test_bad_schema_is_usage_error(tmp_path):
    (tmp_path / "s.json").write_text("{}")
    assert main(["propagate", str(tmp_path / "s.json")]) == 2


def test_verify_core_json(capsys):
    assert main(["verify", "--suite", "core", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert all(c["status"] != "fail" for c in data["checks"])


def test_propagate_writes_outputs(tmp_path, capsys):
    io.write_symplectic(tmp_path / "s.json", suites.free(0.1))
    out = tmp_path / "psi.csv"
    rc = main(["propagate", str(tmp_path / "s.json"), "--z", "0.5,-0.3", "--grid-N", "512", "--grid-L", "12",
               "--out", str(out)])
    assert rc == 0
    comp = json.loads(out.with_suffix(".comparison.json").read_text())
    assert comp["winning_convention"] in comp["families"]
    assert io.read_label(out.with_suffix(".fit.json")).alpha.admissible


def test_quantize_then_wigner(tmp_path, capsys):
    io.write_symbol(tmp_path / "h.json", SymbolField.polynomial({"q^2": 1, "p^2": 1}, 0.5))
    op = tmp_path / "h.mkop"
    common = ["--grid-N", "256", "--grid-L", "12", "--hbar", "0.5"]
    assert main(["quantize", str(tmp_path / "h.json"), "--radius", "6", "--out", str(op), *common]) == 0
    W = tmp_path / "w.csv"
    assert main(["wigner", str(op), "--out", str(W)]) == 0
    sym = io.read_symbol(W)
    Q, P = sym.grid.mesh()
    m = Q**2 + P**2 < 4
    # anti-Wick q^2 + p^2 has Weyl symbol q^2 + p^2 + hbar
    assert np.abs(sym.samples[m] - (Q[m] ** 2 + P[m] ** 2 + 0.5)).max() < 1e-3


def test_flow_reports_definitive(capsys):
    assert main(["flow", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert all(c["status"] != "fail" for c in data["checks"])


def test_flow_needs_two_files(tmp_path):
    io.write_symplectic(tmp_path / "s.json", suites.free(0.1))
    assert main(["flow", str(tmp_path / "s.json")]) == 2


def test_threads_validated():
    with pytest.raises(ValueError):
        main(["table", "annb1", "--threads", "0"])
