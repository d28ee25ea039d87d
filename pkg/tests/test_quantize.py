import numpy as np
import pytest

from complexflow import suites
from complexflow.coherent import CoherentLabel, coherent_state, overlap_closed_form
from complexflow.errors import UnderresolvedError
from complexflow.grid import GridSpec, inner_product, operator_apply
from complexflow.quantize import (
    det_sign,
    idempotency_defect,
    overlap_1d,
    phase_nodes,
    relative_residual,
    single_dyad_projector,
    toeplitz_quantize,
)
from complexflow.symbols import SymbolField

G = GridSpec(1, 16.0, 512, 0.5)


def _expect(M, lab):
    psi = coherent_state(lab, G)
    return inner_product(psi, operator_apply(M, psi))


def test_phase_nodes_resolution_guard():
    with pytest.raises(UnderresolvedError):
        phase_nodes(4.0, 0.5, spacing=0.5)
    nodes = phase_nodes(2.0, 0.5)
    assert nodes.spacing <= np.sqrt(0.5) / 4
    assert np.all(nodes.q**2 + nodes.p**2 <= 4.0)


def test_radius_guard():
    with pytest.raises(UnderresolvedError):
        toeplitz_quantize(SymbolField.constant(1.0), 1j, G, radius=9.0)


def test_overlap_1d_matches_closed_form():
    a = CoherentLabel.of(0.3, -0.4, 0.2 + 1.1j)
    b = CoherentLabel.of(-0.5, 0.6, 0.7j)
    v = overlap_1d(0.3, -0.4, 0.2 + 1.1j, -0.5, 0.6, 0.7j, 0.5)
    assert abs(v - overlap_closed_form(a, b, 0.5)) < 1e-13


def test_toeplitz_of_one_is_identity_inside():
    M = toeplitz_quantize(SymbolField.constant(1.0), 1j, G, radius=8.0)
    for z in ((0, 0), (1.5, -1), (0.5, 2)):
        assert abs(_expect(M, CoherentLabel.of(*z, 1j)) - 1) < 1e-3


def test_toeplitz_of_q_is_position():
    M = toeplitz_quantize(SymbolField.polynomial({"q": 1}), 1j, G, radius=8.0)
    assert abs(_expect(M, CoherentLabel.of(0.7, -0.2, 1j)) - 0.7) < 1e-6


def test_toeplitz_harmonic_expectation():
    # lower symbol of anti-Wick q^2 + p^2 at width i is |z|^2 + 2 hbar
    M = toeplitz_quantize(SymbolField.polynomial({"q^2": 1, "p^2": 1}), 1j, G, radius=8.0)
    assert abs(_expect(M, CoherentLabel.of(0.5, 0.5, 1j)) - (0.5 + 1.0)) < 1e-4


def test_relative_residual_zero_on_equal():
    M = toeplitz_quantize(SymbolField.constant(1.0), 1j, G, radius=4.0)
    assert relative_residual(M, M) == 0.0


def test_det_sign():
    assert det_sign(suites.free(0.1)) == 1
    assert det_sign(suites._S(suites.DET_MINUS)) == -1


@pytest.mark.parametrize("S", [suites.free(0.25), suites.mult(0.1), suites.rotation(0.5)])
def test_single_dyad_is_projector(S):
    P, _ = single_dyad_projector(S, CoherentLabel.of(0.4, -0.3, 1j), G)
    assert idempotency_defect(P) < 1e-8

