import numpy as np
import pytest

from complexflow.coherent import CoherentLabel, coherent_state
from complexflow.errors import GridMismatchError
from complexflow.grid import (
    GridSpec,
    OperatorMatrix,
    WaveFunction,
    dyad,
    fourier_matrix,
    fourier_transform,
    gaussian_fit,
    identity_operator,
    inner_product,
    momentum_operator,
    operator_apply,
    parity_apply,
    position_operator,
)

G = GridSpec(1, 16.0, 512, 0.5)


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(3, 8.0, 64, 1.0)
    with pytest.raises(ValueError):
        GridSpec(1, 8.0, 100, 1.0)
    with pytest.raises(ValueError):
        GridSpec(1, -1.0, 64, 1.0)


def test_grid_nodes_symmetric():
    assert G.x.shape == (512,)
    assert np.allclose(G.x, -G.x[::-1])
    assert abs(G.dx * G.dxi * G.N - 2 * np.pi * G.hbar) < 1e-12


def test_fourier_unitary_and_inverse():
    psi = coherent_state(CoherentLabel.of(0.7, -1.1, 0.3 + 0.8j), G)
    F = fourier_transform(psi)
    assert abs(F.norm() - 1) < 1e-12
    back = fourier_transform(F, "inverse")
    assert np.abs(back.samples - psi.samples).max() < 1e-12


def test_fourier_of_standard_gaussian():
    # width i is an eigenfunction of the unitary transform with eigenvalue 1
    psi = coherent_state(CoherentLabel.of(0.0, 0.0, 1j), G)
    F = fourier_transform(psi)
    ref = coherent_state(CoherentLabel.of(0.0, 0.0, 1j), G.dual())
    assert np.abs(F.samples - ref.samples).max() < 1e-12


def test_fourier_matrix_matches_fft():
    psi = coherent_state(CoherentLabel.of(0.3, 0.4, 1j), G)
    dense = fourier_matrix(G) @ psi.samples
    assert np.abs(dense - fourier_transform(psi).samples).max() < 1e-11


def test_position_momentum_expectations():
    psi = coherent_state(CoherentLabel.of(0.7, -1.1, 0.3 + 0.8j), G)
    X = position_operator(G)
    P = momentum_operator(G)
    assert abs(inner_product(psi, operator_apply(X, psi)) - 0.7) < 1e-10
    assert abs(inner_product(psi, operator_apply(P, psi)) + 1.1) < 1e-10


def test_operator_algebra():
    I = identity_operator(G)
    psi = coherent_state(CoherentLabel.of(0.2, 0.1, 1j), G)
    assert np.abs(operator_apply(I, psi).samples - psi.samples).max() < 1e-12
    D = dyad(psi, psi)
    assert abs((D @ D - D).entries).max() < 1e-10
    assert abs(D.trace() - 1) < 1e-12


def test_parity():
    psi = coherent_state(CoherentLabel.of(0.5, 0.3, 1j), G)
    ref = coherent_state(CoherentLabel.of(-0.5, -0.3, 1j), G)
    assert np.abs(parity_apply(psi).samples - ref.samples).max() < 1e-12


def test_grid_mismatch():
    psi = coherent_state(CoherentLabel.of(0, 0, 1j), G)
    other = coherent_state(CoherentLabel.of(0, 0, 1j), GridSpec(1, 16.0, 256, 0.5))
    with pytest.raises(GridMismatchError):
        inner_product(psi, other)


@pytest.mark.parametrize("q, p, alpha", [(0.0, 0.0, 1j), (1.2, -0.7, 0.4 + 1.3j), (-2.0, 1.5, 2j)])
def test_gaussian_fit_recovers_label(q, p, alpha):
    psi = coherent_state(CoherentLabel.of(q, p, alpha), G) * (0.3 - 0.4j)
    fit = gaussian_fit(psi)
    assert abs(fit.beta.scalar - alpha) < 1e-8
    assert np.abs(fit.z.vector - [q, p]).max() < 1e-8
    assert abs(fit.lam - (0.3 - 0.4j)) < 1e-8
    assert fit.residual < 1e-8


def test_gaussian_fit_two_dimensional():
    g = GridSpec(2, 8.0, 64, 1.0)
    a = np.array([[1j, 0.2], [0.2, 1.5j]])
    psi = coherent_state(CoherentLabel.of([0.3, -0.2], [0.1, 0.4], a), g)
    fit = gaussian_fit(psi)
    assert np.abs(fit.beta.value - a).max() < 1e-6
    assert np.abs(fit.z.vector - [0.3, -0.2, 0.1, 0.4]).max() < 1e-6
