"""Gaussian coherent states with complex width, their overlaps and Lagrangians."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, ComplexFlowError, DegenerateWidthError
from .grid import GridSpec, WaveFunction
from .report import AuditReport
from .symplectic import (
    ComplexSymplectic,
    PhasePoint,
    WidthParameter,
    as_width,
    moebius,
    transport_matrix,
)


@dataclass(frozen=True)
class CoherentLabel:
    z: PhasePoint
    alpha: WidthParameter

    def __post_init__(self):
        if not isinstance(self.z, PhasePoint):
            object.__setattr__(self, "z", PhasePoint.from_vector(self.z))
        object.__setattr__(self, "alpha", as_width(self.alpha))
        if self.z.n != self.alpha.n:
            raise ValueError("label dimension mismatch")

    @classmethod
    def of(cls, q, p, alpha) -> "CoherentLabel":
        return cls(PhasePoint(q, p), as_width(alpha))

    @property
    def n(self) -> int:
        return self.z.n


def _prefactor(alpha: np.ndarray, hbar: float) -> float:
    n = alpha.shape[0]
    d = abs(np.linalg.det(np.linalg.inv(alpha).imag))
    return float((np.pi * hbar) ** (-n / 4) * d**0.25)


def coherent_values(label: CoherentLabel, hbar: float, x: np.ndarray) -> np.ndarray:
    """Evaluate the state at points ``x`` of shape ``(..., n)``, or ``(...)`` when n = 1."""
    a = label.alpha.value
    q, p = label.z.q, label.z.p
    n = label.n
    x = np.asarray(x, dtype=float)
    if n == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    ainv = np.linalg.inv(a)
    d = x - q
    quad = np.einsum("...i,ij,...j->...", d, ainv, d)
    phase = -0.5j * quad / hbar + 1j * (x @ p) / hbar - 0.5j * float(p @ q) / hbar
    return _prefactor(a, hbar) * np.exp(phase)


def coherent_state(label: CoherentLabel, grid: GridSpec) -> WaveFunction:
    """Sample the coherent state of ``label`` on ``grid``.

    In n dimensions the exponent is ``-(i/2hbar)(x-q).alpha^{-1}(x-q)
    + i p.x/hbar - i p.q/2hbar`` with normalisation
    ``(pi hbar)^{-n/4} |det Im alpha^{-1}|^{1/4}``.
    """
    if not label.alpha.admissible:
        raise AdmissibilityError(f"inadmissible width {label.alpha}")
    if label.n != grid.n:
        raise ValueError("label and grid dimensions differ")
    pts = np.stack([m for m in grid.mesh()], axis=-1)
    return WaveFunction(grid, coherent_values(label, grid.hbar, pts))


def _sqrt_det(A: np.ndarray) -> complex:
    """Branch of ``sqrt(det A)`` continuous on matrices with positive-definite real part."""
    return complex(np.prod(np.sqrt(np.linalg.eigvals(A).astype(complex))))


def overlap_closed_form(a: CoherentLabel, b: CoherentLabel, hbar: float) -> complex:
    """``<psi_a|psi_b>`` by completing the square.

    The integrand is ``exp(-x.Ax + B.x + C)`` with
    ``A = (i/2hbar)(alpha_b^{-1} - conj(alpha_a)^{-1})`` and
    ``B = (i/hbar)(alpha_b^{-1} q_b - conj(alpha_a)^{-1} q_a + p_b - p_a)``,
    whose integral is ``pi^{n/2} det(A)^{-1/2} exp(B.A^{-1}B/4 + C)``.
    """
    if a.n != b.n:
        raise ValueError("label dimension mismatch")
    n = a.n
    ia = np.linalg.inv(a.alpha.value.conj())
    ib = np.linalg.inv(b.alpha.value)
    A = 0.5j / hbar * (ib - ia)
    qa, pa, qb, pb = a.z.q, a.z.p, b.z.q, b.z.p
    B = 1j / hbar * (ib @ qb - ia @ qa + pb - pa)
    C = 0.5j / hbar * (qa @ ia @ qa - qb @ ib @ qb + pa @ qa - pb @ qb)
    if np.min(np.linalg.eigvalsh(A.real)) <= 0:
        raise DegenerateWidthError("degenerate width combination in overlap")
    try:
        Ainv_B = np.linalg.solve(A, B)
    except np.linalg.LinAlgError as exc:
        raise DegenerateWidthError("degenerate width combination in overlap") from exc
    val = np.pi ** (n / 2) / _sqrt_det(A) * np.exp(0.25 * B @ Ainv_B + C)
    return complex(_prefactor(a.alpha.value, hbar) * _prefactor(b.alpha.value, hbar) * val)


def lagrangian_residual(label: CoherentLabel, point) -> float:
    """``|x + alpha xi - (q + alpha p)|`` for a complex phase-space point ``(x, xi)``."""
    if label.n != 1:
        raise ValueError("lagrangian_residual is one-dimensional")
    x, xi = point
    al = label.alpha.scalar
    return float(abs(x + al * xi - (label.z.q[0] + al * label.z.p[0])))


def lagrangian_transport_check(
    S: ComplexSymplectic, label: CoherentLabel, samples: int = 32, tol: float = 1e-10, seed: int = 0
) -> AuditReport:
    """Test which combination of maps carries one complex Lagrangian onto another.

    Points ``(q - alpha s, p + s)`` with random complex ``s`` are pushed by
    ``S^{-1}`` and by ``S``; membership in the Lagrangian with width ``beta`` in
    ``{S.alpha, S^{-1}.alpha}`` through the centre ``T z`` with ``T`` the
    transport matrix or its inverse is measured.
    """
    if label.n != 1:
        raise ValueError("lagrangian_transport_check is one-dimensional")
    rng = np.random.default_rng(seed)
    al = label.alpha.scalar
    z = label.z.vector
    s = rng.normal(size=samples) + 1j * rng.normal(size=samples)
    pts = np.stack([z[0] - al * s, z[1] + s])
    maps = {"S^-1": S.inv().matrix, "S": S.matrix}
    widths = {"S.alpha": lambda: moebius(S, label.alpha), "S^-1.alpha": lambda: moebius(S.inv(), label.alpha)}
    transports = {"T": lambda: transport_matrix(S, label.alpha), "T^-1": lambda: transport_matrix(S, label.alpha).inv()}
    report = AuditReport("lagrangian transport", tol)
    for mname, M in maps.items():
        img = M @ pts
        for wname, wfn in widths.items():
            for tname, tfn in transports.items():
                key = f"push {mname}, width {wname}, centre {tname}"
                try:
                    beta = wfn().scalar
                    c = tfn()(z)
                except (ComplexFlowError, ValueError) as exc:
                    report.residuals[key] = float("inf")
                    report.notes.append(f"{key}: {exc}")
                    continue
                r = np.abs(img[0] + beta * img[1] - (c[0] + beta * c[1]))
                report.residuals[key] = float(r.max())
    return report
