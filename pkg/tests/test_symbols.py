import numpy as np
import pytest

from complexflow.coherent import CoherentLabel, coherent_state
from complexflow.grid import GridSpec, dyad
from complexflow.symbols import (
    PhaseGrid,
    SymbolField,
    ambiguity_rank_one,
    integrate,
    pushforward,
    reparametrize,
    toeplitz_to_weyl,
    twisted_convolution,
    weyl_rank_one,
    wigner_numeric,
)
from complexflow.symplectic import ComplexSymplectic, transport_matrix

H = 0.5


def test_polynomial_parsing_and_eval():
    h = SymbolField.polynomial({"q^2": 1, "q p": 0.5, "p^2": [0.75, 0], "1": 2})
    assert h.degree == 2
    assert abs(h(1.0, 2.0) - (1 + 1 + 3 + 2)) < 1e-14


def test_polynomial_degree_cap():
    with pytest.raises(ValueError):
        SymbolField.polynomial({(5, 4): 1.0})


def test_grid_symbol_rejects_nonfinite():
    g = PhaseGrid.midpoint(2.0, 8)
    with pytest.raises(ValueError):
        SymbolField.from_samples(g, np.full(g.shape, np.nan))


def test_grid_interpolation_is_cubic_exact_on_nodes():
    g = PhaseGrid.midpoint(4.0, 64)
    h = SymbolField.from_function(lambda q, p: np.exp(-(q**2 + p**2)), g)
    assert abs(h(g.q[10], g.p[20]) - np.exp(-(g.q[10] ** 2 + g.p[20] ** 2))) < 1e-12


def test_reparametrize_q_squared():
    h = SymbolField.polynomial({"q^2": 1}, H)
    r = reparametrize(h, 1j, 2j)
    assert abs(r.coeffs[2, 0] - 1) < 1e-14
    assert abs(r.coeffs[0, 0] + H / 2) < 1e-14
    assert r.degree == 2


def test_reparametrize_round_trip_gaussian():
    h = SymbolField.gaussian(1.0, (0.3, -0.2), ((1.0, 0.2), (0.2, 0.8)), H)
    back = reparametrize(reparametrize(h, 1j, 2j), 2j, 1j)
    q = np.linspace(-2, 2, 7)
    assert np.abs(back(q, q[::-1]) - h(q, q[::-1])).max() < 1e-12


def test_toeplitz_to_weyl_harmonic():
    # anti-Wick q^2 + p^2 at width i has Weyl symbol q^2 + p^2 + hbar
    w = toeplitz_to_weyl(SymbolField.polynomial({"q^2": 1, "p^2": 1}, H), 1j)
    assert abs(w.coeffs[0, 0] - H) < 1e-14
    assert abs(w.coeffs[2, 0] - 1) < 1e-14 and abs(w.coeffs[0, 2] - 1) < 1e-14


def test_gaussian_integral_exact():
    P = np.array([[2.0, 0.3], [0.3, 1.0]])
    h = SymbolField.gaussian(1.0, (0.1, 0.2), P, H)
    assert abs(integrate(h) - 2 * np.pi / np.sqrt(np.linalg.det(P))) < 1e-12


def test_pushforward_real_map():
    S = ComplexSymplectic(np.array([[1, 0.5], [0, 1]], dtype=complex))
    T = transport_matrix(S, 1j)
    h = SymbolField.polynomial({"q": 1}, H)
    pushed = pushforward(h, T)
    z = np.array([0.3, 0.7])
    zi = np.linalg.solve(T.matrix, z)
    assert abs(pushed(*z) - h(*zi)) < 1e-12


def test_wigner_of_coherent_state():
    g = GridSpec(1, 12.0, 512, H)
    psi = coherent_state(CoherentLabel.of(0.5, -0.3, 1j), g)
    W = wigner_numeric(dyad(psi, psi))
    assert np.abs(W.samples.imag).max() < 1e-10
    assert abs(integrate(W) / (2 * np.pi * H) - 1) < 1e-8


def test_weyl_closed_form_matches_numeric():
    g = GridSpec(1, 12.0, 512, H)
    a, b = CoherentLabel.of(0.3, 0.2, 1j), CoherentLabel.of(-0.4, 0.5, 0.5 + 1j)
    W = wigner_numeric(dyad(coherent_state(a, g), coherent_state(b, g)))
    Q, P = W.grid.mesh()
    m = (np.abs(Q) < 4) & (np.abs(P) < 4)
    C = weyl_rank_one(a, b, W.grid, H, variant="exact")
    assert np.abs(C.samples[m] - W.samples[m]).max() < 1e-6


def test_twisted_convolution_product_rule():
    # spreading functions multiply by twisted convolution: |a><b| |b><c| = <b|b> |a><c|
    g = PhaseGrid.centred(7.0, 71)
    a, b, c = (CoherentLabel.of(*v, 1j) for v in ((0.3, 0.2), (-0.4, 0.1), (0.1, -0.5)))
    T = twisted_convolution(ambiguity_rank_one(a, b, g, H), ambiguity_rank_one(b, c, g, H))
    ref = ambiguity_rank_one(a, c, g, H)
    Q, P = g.mesh()
    m = (np.abs(Q) < 3) & (np.abs(P) < 3)
    assert np.abs(T.samples[m] - ref.samples[m]).max() < 1e-9
