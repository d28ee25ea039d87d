import numpy as np
import pytest

from complexflow import suites
from complexflow.coherent import CoherentLabel, coherent_state
from complexflow.errors import ChartError
from complexflow.grid import GridSpec, gaussian_fit, inner_product
from complexflow.metaplectic import (
    FAMILIES,
    convention_audit,
    family_prediction,
    fourier_kernel_check,
    kernel_apply,
    kernel_build,
    kernel_compose_check,
    propagator,
    unitarity_defect,
)
from complexflow.symplectic import ComplexSymplectic, moebius

G = GridSpec(1, 16.0, 1024, 0.5)
GS = GridSpec(1, 12.0, 256, 0.5)
LAB = CoherentLabel.of(0.5, -0.3, 1j)


def test_identity_kernel():
    psi = coherent_state(LAB, G)
    out = kernel_apply(ComplexSymplectic(np.eye(2, dtype=complex)), psi)
    assert np.abs(out.samples - psi.samples).max() < 1e-12


def test_quarter_turn_is_fourier():
    # the comparison needs a grid that is its own dual
    N = 256
    g = GridSpec(1, np.sqrt(np.pi * 0.5 * N / 2), N, 0.5)
    assert abs(g.dual().L - g.L) < 1e-12
    assert fourier_kernel_check(g) < 1e-10


@pytest.mark.parametrize("name", list(suites.real_case_set()))
def test_real_unitarity(name):
    S = suites.real_case_set()[name]
    assert unitarity_defect(S, [LAB, CoherentLabel.of(-1, 0.5, 0.3 + 0.9j)], G) < 1e-6


def test_dense_and_matrix_free_agree():
    S = suites.free(0.1)
    psi = coherent_state(LAB, GS)
    K = kernel_build(S, GS, chart="a-chart")
    a = K.apply(psi)
    b = kernel_apply(S, psi, chart="a-chart")
    # the matrix-free path drops amplified spectral noise below 1e-14
    assert np.abs(a.samples - b.samples).max() < 1e-7


def test_unknown_chart():
    with pytest.raises(ChartError):
        kernel_build(suites.free(0.1), GS, chart="z-chart")


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        kernel_build(suites.free(0.1), GridSpec(2, 8.0, 16, 1.0))


@pytest.mark.parametrize("name", list(suites.complex_case_set()))
def test_free_evolution_image_is_gaussian_with_moebius_width(name):
    S = suites.complex_case_set()[name]
    U, _ = propagator(S, G)
    fit = gaussian_fit(U(coherent_state(LAB, G)))
    assert fit.residual < 1e-6
    assert abs(fit.beta.scalar - moebius(S, 1j).scalar) < 1e-6


def test_audit_names_single_family():
    cases = list(suites.complex_case_set().values())
    rep = convention_audit(cases, [1j], [(0.0, 0.0), (0.5, -0.3)], G, meta=False)
    assert rep.best_family in FAMILIES
    assert len(rep.matching) == 1
    beta, w = family_prediction(rep.best_family, suites.free(0.25), 1j, (0.5, -0.3))
    U, _ = propagator(suites.free(0.25), G)
    fit = gaussian_fit(U(coherent_state(LAB, G)))
    assert np.abs(fit.z.vector - w).max() < 1e-6


def test_kernel_composition_up_to_scalar():
    rep = kernel_compose_check(suites.free(0.1), suites.mult(0.1), G, [LAB])
    assert max(rep.residuals.values()) < 1e-5


def test_complex_kernel_not_unitary():
    U, _ = propagator(suites.free(0.25), G)
    out = U(coherent_state(LAB, G))
    assert abs(inner_product(out, out) - 1.0) > 1e-3
