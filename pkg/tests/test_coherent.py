import numpy as np
import pytest

from complexflow.coherent import (
    CoherentLabel,
    coherent_state,
    coherent_values,
    lagrangian_residual,
    overlap_closed_form,
)
from complexflow.errors import AdmissibilityError
from complexflow.grid import GridSpec, inner_product
from complexflow.symplectic import WidthParameter

G = GridSpec(1, 20.0, 2048, 0.5)


@pytest.mark.parametrize("alpha", [1j, 2j, 1 + 1j, 0.3 + 0.7j])
@pytest.mark.parametrize("z", [(0, 0), (1, 0), (0, 1), (2, -1)])
def test_normalized(alpha, z):
    assert abs(coherent_state(CoherentLabel.of(*z, alpha), G).norm() - 1) < 1e-9


def test_explicit_formula_at_origin():
    # width i, centre 0: (pi hbar)^(-1/4) exp(-x^2/(2 hbar))
    x = np.array([0.0, 0.5, -1.3])
    val = coherent_values(CoherentLabel.of(0.0, 0.0, 1j), 0.5, x)
    assert np.allclose(val, (np.pi * 0.5) ** -0.25 * np.exp(-x**2))


def test_overlap_self_is_one():
    lab = CoherentLabel.of(0.4, -0.9, 0.5 + 1.2j)
    assert abs(overlap_closed_form(lab, lab, 0.5) - 1) < 1e-13


def test_overlap_standard_modulus():
    # |<z|w>| = exp(-|z-w|^2 / (4 hbar)) for width i
    a, b = CoherentLabel.of(0.0, 0.0, 1j), CoherentLabel.of(1.0, 0.5, 1j)
    assert abs(abs(overlap_closed_form(a, b, 0.5)) - np.exp(-1.25 / 2)) < 1e-13


def test_overlap_matches_grid():
    rng = np.random.default_rng(7)
    for _ in range(10):
        a = CoherentLabel.of(*rng.uniform(-2, 2, 2), complex(rng.uniform(-1, 1), rng.uniform(0.4, 2)))
        b = CoherentLabel.of(*rng.uniform(-2, 2, 2), complex(rng.uniform(-1, 1), rng.uniform(0.4, 2)))
        num = inner_product(coherent_state(a, G), coherent_state(b, G))
        assert abs(overlap_closed_form(a, b, 0.5) - num) < 1e-9


def test_overlap_two_dimensional():
    g = GridSpec(2, 8.0, 64, 1.0)
    a = CoherentLabel.of([0.3, -0.2], [0.1, 0.4], np.array([[1j, 0.2], [0.2, 1.5j]]))
    b = CoherentLabel.of([-0.1, 0.5], [0.0, -0.3], np.diag([1j, 0.8j]))
    num = inner_product(coherent_state(a, g), coherent_state(b, g))
    assert abs(overlap_closed_form(a, b, 1.0) - num) < 1e-8


def test_inadmissible_label_rejected():
    with pytest.raises(AdmissibilityError):
        coherent_state(CoherentLabel(np.array([0.0, 0.0]), WidthParameter(-1j, check=False)), G)


def test_lagrangian_residual_on_centre():
    lab = CoherentLabel.of(0.3, 0.2, 1j)
    s = 0.4 - 0.1j
    assert lagrangian_residual(lab, (0.3 - 1j * s, 0.2 + s)) < 1e-14
