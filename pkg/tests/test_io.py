import json

import numpy as np
import pytest

from complexflow import io, suites
from complexflow.coherent import CoherentLabel, coherent_state
from complexflow.errors import SchemaError
from complexflow.grid import GridSpec
from complexflow.metaplectic import convention_audit
from complexflow.quantize import comp_symbol, toeplitz_quantize
from complexflow.symbols import PhaseGrid, SymbolField


def test_symplectic_round_trip(tmp_path):
    S = suites.oscillator(0.2)
    io.write_symplectic(tmp_path / "s.json", S)
    assert np.array_equal(io.read_symplectic(tmp_path / "s.json").matrix, S.matrix)


def test_symplectic_schema_error(tmp_path):
    (tmp_path / "s.json").write_text(json.dumps({"n": 2, "rows": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}))
    with pytest.raises(SchemaError):
        io.read_symplectic(tmp_path / "s.json")


@pytest.mark.parametrize("grid", [GridSpec(1, 8.0, 64, 0.5), GridSpec(2, 8.0, 16, 1.0)])
def test_wavefunction_round_trip(tmp_path, grid):
    lab = CoherentLabel.of([0.3] * grid.n, [0.1] * grid.n, 1j if grid.n == 1 else 1j * np.eye(2))
    psi = coherent_state(lab, grid)
    io.write_wavefunction(tmp_path / "w.csv", psi)
    back = io.read_wavefunction(tmp_path / "w.csv", hbar=grid.hbar)
    assert back.grid == grid
    assert np.array_equal(back.samples, psi.samples)


def test_wavefunction_bad_header(tmp_path):
    (tmp_path / "w.csv").write_text("a,b,c\n1,2,3\n")
    with pytest.raises(SchemaError):
        io.read_wavefunction(tmp_path / "w.csv")


def test_operator_round_trip_and_magic(tmp_path):
    g = GridSpec(1, 8.0, 64, 0.5)
    H = toeplitz_quantize(SymbolField.constant(1.0), 1j, g, radius=4.0)
    io.write_operator(tmp_path / "h.mkop", H)
    assert np.array_equal(io.read_operator(tmp_path / "h.mkop").entries, H.entries)
    (tmp_path / "bad.mkop").write_bytes(b"XXXX" + (tmp_path / "h.mkop").read_bytes()[4:])
    with pytest.raises(SchemaError):
        io.read_operator(tmp_path / "bad.mkop")


def test_polynomial_symbol_round_trip(tmp_path):
    h = SymbolField.polynomial({"q^2": 1, "q p": 0.5 - 0.1j, "1": 2}, 0.5)
    io.write_symbol(tmp_path / "h.json", h)
    back = io.read_symbol(tmp_path / "h.json")
    assert back.kind == "polynomial" and np.array_equal(back.coeffs, h.coeffs) and back.hbar == h.hbar


def test_gaussian_symbol_round_trip(tmp_path):
    h = SymbolField.gaussian(1.0 + 0.5j, (0.3, -0.2), ((1.0, 0.2), (0.2, 0.8)), 0.5)
    io.write_symbol(tmp_path / "g.json", h)
    back = io.read_symbol(tmp_path / "g.json")
    q = np.linspace(-2, 2, 5)
    assert np.array_equal(back(q, q), h(q, q))


def test_grid_symbol_csv_round_trip(tmp_path):
    g = PhaseGrid.midpoint(3.0, 16)
    h = SymbolField.from_function(lambda q, p: np.exp(-q * q) * (1 + 1j * p), g)
    io.write_symbol(tmp_path / "h.csv", h)
    back = io.read_symbol(tmp_path / "h.csv")
    assert back.grid == g and np.array_equal(back.samples, h.samples)


def test_label_round_trip(tmp_path):
    lab = CoherentLabel.of(0.3, -0.7, 0.2 + 1.1j)
    io.write_label(tmp_path / "l.json", lab)
    back = io.read_label(tmp_path / "l.json")
    assert np.array_equal(back.z.vector, lab.z.vector) and np.array_equal(back.alpha.value, lab.alpha.value)


def test_offdiag_round_trip(tmp_path):
    h = SymbolField.polynomial({"q^2": 1}, 0.5)
    sym = comp_symbol(h, 1j, suites._S(suites.DET_MINUS))
    io.write_offdiag(tmp_path / "o.json", sym)
    back = io.read_offdiag(tmp_path / "o.json")
    assert back.sign_flip == sym.sign_flip and back.normalization == sym.normalization
    assert np.array_equal(back.h.coeffs, sym.h.coeffs)
    assert np.array_equal(back.map.matrix, sym.map.matrix)


def test_convention_report_round_trip(tmp_path):
    rep = convention_audit([suites.free(0.1)], [1j], [(0.5, -0.3)], GridSpec(1, 16.0, 512, 0.5), meta=False)
    io.write_convention_report(tmp_path / "r.json", rep)
    back = io.read_convention_report(tmp_path / "r.json")
    assert back.family_residuals == rep.family_residuals
    assert back.best_family == rep.best_family
