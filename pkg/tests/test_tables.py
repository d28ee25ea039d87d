import numpy as np
import pytest

from complexflow.coherent import CoherentLabel, coherent_state
from complexflow.errors import AdmissibilityError
from complexflow.grid import GridSpec, inner_product
from complexflow.tables import ANNB1, COLUMNS, compute_row, compute_table, render_markdown

FREE_COLS = ("S^-1 conj S", "S^-1 conj S . i", "T_{S^-1 conj S}", "T_{conj S}")


@pytest.mark.parametrize("t", [0.1, 0.25, 0.35])
def test_free_row_matches(t):
    row = compute_table("annb1", t, 0.5)[0]
    assert row.name == "free ev."
    for c in FREE_COLS:
        assert row.match[c], c


def test_free_row_hand_values():
    # S = [[1, -it], [0, 1]]: S^-1 conj S = [[1, 2it], [0, 1]], acting on i gives i(1 + 2t)
    t = 0.25
    row = compute_table("annb1", t, 0.5)[0]
    assert np.allclose(row.computed["S^-1 conj S"], [[1, 2j * t], [0, 1]])
    assert abs(row.computed["S^-1 conj S . i"] - 1.5j) < 1e-14


def test_every_cell_matched_or_flagged():
    for name in ("annb1", "annb2"):
        for row in compute_table(name, 0.25, 0.5):
            assert set(row.printed) <= set(row.match)
            for c, ok in row.match.items():
                assert ok or row.computed.get(c) is not None or row.notes


def test_D_is_the_grid_overlap():
    g = GridSpec(1, 16.0, 1024, 0.5)
    row = compute_row(ANNB1[0], 0.1, 0.5, z=(0.0, 1.0))
    beta = row.computed["S^-1 conj S . i"]
    w = row.computed["T_{S^-1 conj S}"] @ np.array([0.0, 1.0])
    k = coherent_state(CoherentLabel.of(w[0].real, w[1].real, beta), g)
    b = coherent_state(CoherentLabel.of(0.0, 1.0, 1j), g)
    assert abs(row.computed["D_i(q,p)"] - 1 / inner_product(k, b)) < 1e-9


def test_inadmissible_t():
    with pytest.raises(AdmissibilityError):
        compute_table("annb1", 0.6, 0.5)


def test_markdown_flags_mismatch():
    md = render_markdown(compute_table("annb1", 0.25, 0.5))
    assert "MISMATCH" in md and "MATCH" in md
    header = md.splitlines()[0]
    for c in COLUMNS:
        assert c in header


def test_unknown_table():
    with pytest.raises(KeyError):
        compute_table("annb3", 0.25, 0.5)
