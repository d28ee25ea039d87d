import numpy as np
import pytest

from complexflow.errors import AdmissibilityError, DegenerateWidthError, PoleError
from complexflow.symplectic import (
    ComplexSymplectic,
    ExtendedPoint,
    PhasePoint,
    WidthParameter,
    admissible_alpha_search,
    as_width,
    flow_composition_audit,
    flow_map,
    is_admissible_triple,
    kernel_transport,
    moebius,
    symplectic_form,
    transport_matrix,
)


def S_(m):
    return ComplexSymplectic(np.array(m, dtype=complex))


def test_rejects_wrong_determinant():
    with pytest.raises(ValueError):
        S_([[2, 0], [0, 1]])


def test_det_class():
    assert S_(np.eye(2)).det_class == 1
    assert S_([[0, 1j], [-1j, 0]]).det_class == -1


def test_n2_symplectic_relation_enforced():
    M = np.eye(4, dtype=complex)
    M[0, 1] = 0.5  # det 1 but not symplectic
    with pytest.raises(ValueError):
        ComplexSymplectic(M)


def test_width_admissibility():
    with pytest.raises(AdmissibilityError):
        WidthParameter(-1j)
    assert not WidthParameter(-1j, check=False).admissible
    with pytest.raises(AdmissibilityError):
        WidthParameter(np.array([[1j, 0], [0, -1j]]))


@pytest.mark.parametrize(
    "S, alpha, expected",
    [
        (np.eye(2), 1j, 1j),
        ([[1, 0.5j], [0, 1]], 1j, 1.5j),
        (np.diag([np.exp(-0.6j), np.exp(0.6j)]), 1j, np.exp(-1.2j) * 1j),
    ],
)
def test_moebius_examples(S, alpha, expected):
    assert abs(moebius(S_(S), alpha).scalar - expected) < 1e-12


def test_moebius_pole():
    with pytest.raises(PoleError):
        moebius(S_([[1, 0], [1, 1]]), -1 + 0j + 1e-300j)


def test_moebius_left_action_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        ms = []
        for _ in range(2):
            m = np.eye(2) + 0.3 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
            ms.append(S_(m / np.sqrt(np.linalg.det(m))))
        a = complex(rng.uniform(-1, 1), rng.uniform(0.3, 2))
        lhs = moebius(ms[0] @ ms[1], a).value
        rhs = moebius(ms[0], moebius(ms[1], a).value).value
        assert np.abs(lhs - rhs).max() < 1e-10 * max(1, np.abs(lhs).max())


def test_moebius_n2_symmetric():
    B = np.array([[1.0, 0.3], [0.3, 0.5]])
    S = S_(np.block([[np.eye(2), -0.1j * B], [np.zeros((2, 2)), np.eye(2)]]))
    a = np.array([[1j, 0.2], [0.2, 1.5j]])
    b = moebius(S, a).value
    assert np.abs(b - b.T).max() < 1e-12
    assert np.abs(b - (a - 0.1j * B)).max() < 1e-12


@pytest.mark.parametrize(
    "S, expected",
    [
        (np.eye(2), np.eye(2)),
        ([[1, 0.5j], [0, 1]], np.diag([1, 4 / 3])),
        ([[1, 0.25j], [0, 1]], np.diag([1, 1.2])),
    ],
)
def test_transport_examples(S, expected):
    T = transport_matrix(S_(S), 1j)
    assert np.abs(T.matrix - expected).max() < 1e-12


def test_transport_real_S_is_S():
    th = 0.7
    S = S_([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
    for a in (1j, 2j, 0.3 + 0.7j):
        assert np.abs(transport_matrix(S, a).matrix - S.matrix.real).max() < 1e-12


def test_transport_degenerate_width():
    # S.i = 0 has vanishing imaginary part
    with pytest.raises(DegenerateWidthError):
        transport_matrix(S_([[1, -1j], [0, 1]]), 1j)


def test_flow_map_example():
    out = flow_map(S_([[1, 0.5j], [0, 1]]), ExtendedPoint(PhasePoint(1.0, 1.0), as_width(1j)))
    assert np.abs(out.z.vector - [1, 4 / 3]).max() < 1e-12
    assert abs(out.alpha.scalar - 1.5j) < 1e-12


def test_flow_map_rotation_period_four():
    S = S_([[0, 1], [-1, 0]])
    pt = ExtendedPoint(PhasePoint(1.0, 0.0), as_width(1j))
    for _ in range(4):
        pt = flow_map(S, pt)
    assert np.abs(pt.z.vector - [1, 0]).max() < 1e-12
    assert abs(pt.alpha.scalar - 1j) < 1e-12


def test_flow_audit_identity_and_rotations():
    pts = [ExtendedPoint(PhasePoint(0.3, -1.0), as_width(0.2 + 1j))]
    rep = flow_composition_audit(S_(np.eye(2)), S_(np.eye(2)), pts)
    assert len(rep.matching) == 4
    r = lambda th: S_([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
    rep = flow_composition_audit(r(0.3), r(1.1), pts)
    assert rep.residuals["Phi_S o Phi_S2"] <= 1e-12
    assert rep.residuals["Phi_S2 o Phi_S"] <= 1e-12


def test_flow_audit_complex_reports_counterexamples():
    S = S_([[1, -0.1j], [0, 1]])
    pts = [ExtendedPoint(PhasePoint(1.0, 1.0), as_width(1j))]
    rep = flow_composition_audit(S, S, pts)
    assert rep.definitive
    assert rep.matching or rep.counterexamples


def test_kernel_transport_flow_is_representation():
    S = S_([[1, -0.1j], [0, 1]])
    S2 = S_([[1, 0], [-0.1j, 1]])
    pts = [ExtendedPoint(PhasePoint(1.0, -0.5), as_width(0.2 + 1j))]
    rep = flow_composition_audit(S, S2, pts, transport=kernel_transport)
    assert rep.residuals["Phi_S o Phi_S2"] < 1e-12


def test_symplectic_form():
    z = PhasePoint(0.3, 0.7)
    assert symplectic_form(z, z) == 0
    assert symplectic_form(PhasePoint(1.0, 0.0), PhasePoint(0.0, 1.0)) == -1
    rng = np.random.default_rng(0)
    for _ in range(10):
        m = rng.normal(size=(2, 2))
        m /= np.sqrt(abs(np.linalg.det(m)))
        if np.linalg.det(m) < 0:
            m[:, 0] *= -1
        a, b = rng.normal(size=2), rng.normal(size=2)
        lhs = symplectic_form(PhasePoint.from_vector(m @ a), PhasePoint.from_vector(m @ b))
        assert abs(lhs - symplectic_form(PhasePoint.from_vector(a), PhasePoint.from_vector(b))) < 1e-12


def test_anticanonical_reverses_form():
    R = np.diag([1.0, -1.0])
    a, b = np.array([0.3, 1.2]), np.array([-0.7, 0.4])
    lhs = symplectic_form(PhasePoint.from_vector(R @ a), PhasePoint.from_vector(R @ b))
    assert abs(lhs + symplectic_form(PhasePoint.from_vector(a), PhasePoint.from_vector(b))) < 1e-12


def test_admissible_alpha_search_examples():
    assert abs(admissible_alpha_search(S_(np.eye(2))).scalar - 1j) < 1e-12
    assert is_admissible_triple(S_([[1, -0.25j], [0, 1]]), 1j)
    assert is_admissible_triple(S_([[0, 1j], [-1j, 0]]), 1j)
