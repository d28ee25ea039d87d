"""Exact arithmetic on complex symplectic matrices and Gaussian widths.

Everything here works on explicit matrices; nothing is discretised.  Phase
space points are columns ``(q, p)`` and a matrix ``S`` acts on them from the
left.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError, DegenerateWidthError, PoleError
from .report import AuditReport

_TOL = 1e-12


def symplectic_unit(n: int) -> np.ndarray:
    """Return ``J = [[0, I], [-I, 0]]`` of size ``2n``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class ComplexSymplectic:
    """A ``2n x 2n`` complex matrix with determinant ``+1`` or ``-1``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise ValueError(f"expected a 2n x 2n matrix, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        scale = max(1.0, float(np.max(np.abs(m)))) ** m.shape[0]
        det = np.linalg.det(m)
        if abs(det - 1) <= _TOL * scale:
            cls = 1
        elif abs(det + 1) <= _TOL * scale:
            cls = -1
        else:
            raise ValueError(f"determinant {det} is not +-1")
        n = m.shape[0] // 2
        if n > 1:
            J = symplectic_unit(n)
            if np.max(np.abs(m.T @ J @ m - cls * J)) > _TOL * max(1.0, float(np.max(np.abs(m)))) ** 2:
                raise ValueError("matrix is not (anti)symplectic")
        object.__setattr__(self, "det_class", cls)

    @classmethod
    def from_entries(cls, a, b, c, d) -> "ComplexSymplectic":
        return cls(np.array([[a, b], [c, d]], dtype=complex))

    @classmethod
    def from_blocks(cls, A, B, C, D) -> "ComplexSymplectic":
        return cls(np.block([[np.atleast_2d(A), np.atleast_2d(B)], [np.atleast_2d(C), np.atleast_2d(D)]]))

    @classmethod
    def identity(cls, n: int = 1) -> "ComplexSymplectic":
        return cls(np.eye(2 * n, dtype=complex))

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def blocks(self):
        n = self.n
        m = self.matrix
        return m[:n, :n], m[:n, n:], m[n:, :n], m[n:, n:]

    @property
    def is_real(self) -> bool:
        return bool(np.max(np.abs(self.matrix.imag)) <= _TOL)

    def conj(self) -> "ComplexSymplectic":
        return ComplexSymplectic(self.matrix.conj())

    def inv(self) -> "ComplexSymplectic":
        return ComplexSymplectic(np.linalg.inv(self.matrix))

    def __matmul__(self, other: "ComplexSymplectic") -> "ComplexSymplectic":
        return ComplexSymplectic(self.matrix @ other.matrix)

    def momentum_flipped(self) -> "ComplexSymplectic":
        """``diag(1,-1) S diag(1,-1)``: the same map written for ``(q, -p)``."""
        A, B, C, D = self.blocks
        return ComplexSymplectic.from_blocks(A, -B, -C, D)

    def __repr__(self):
        return f"ComplexSymplectic({np.array2string(self.matrix, precision=6)})"


@dataclass(frozen=True)
class WidthParameter:
    """Width of a Gaussian: ``Im > 0`` scalar, or a Siegel matrix for ``n > 1``.

    Stored as an ``n x n`` complex array.  ``check=False`` skips the upper
    half-space test so that inadmissible Möbius images can still be carried
    around and inspected.
    """

    value: np.ndarray
    check: bool = True

    def __post_init__(self):
        v = np.atleast_2d(np.array(self.value, dtype=complex))
        if v.shape[0] != v.shape[1]:
            raise ValueError("width must be square")
        v.setflags(write=False)
        object.__setattr__(self, "value", v)
        if self.check and not self.admissible:
            raise AdmissibilityError(f"width {self.value} is not in the upper half-space")

    @property
    def n(self) -> int:
        return self.value.shape[0]

    @property
    def scalar(self) -> complex:
        if self.n != 1:
            raise ValueError("scalar requested from a matrix width")
        return complex(self.value[0, 0])

    @property
    def admissible(self) -> bool:
        v = self.value
        if not np.all(np.isfinite(v)):
            return False
        if self.n == 1:
            return bool(v[0, 0].imag > 0)
        if np.max(np.abs(v - v.T)) > _TOL * max(1.0, float(np.max(np.abs(v)))):
            return False
        return bool(np.linalg.eigvalsh(v.imag).min() > 0)

    def __repr__(self):
        if self.n == 1:
            return f"WidthParameter({self.scalar})"
        return f"WidthParameter({np.array2string(self.value, precision=6)})"


def as_width(alpha, check: bool = True) -> WidthParameter:
    if isinstance(alpha, WidthParameter):
        return alpha
    return WidthParameter(alpha, check=check)


@dataclass(frozen=True)
class PhasePoint:
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.atleast_1d(np.array(self.q, dtype=float))
        p = np.atleast_1d(np.array(self.p, dtype=float))
        if q.shape != p.shape or q.ndim != 1:
            raise ValueError("q and p must be vectors of equal length")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise ValueError("phase point must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_vector(cls, z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        n = z.shape[0] // 2
        return cls(z[:n], z[n:])

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])


@dataclass(frozen=True)
class ExtendedPoint:
    z: PhasePoint
    alpha: WidthParameter

    def __post_init__(self):
        if self.z.n != self.alpha.n:
            raise ValueError("dimension mismatch between point and width")


@dataclass(frozen=True)
class TransportMatrix:
    """Real linear map of phase space, ``z -> matrix @ z``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix)
        if np.iscomplexobj(m):
            if np.max(np.abs(m.imag)) > _TOL * max(1.0, float(np.max(np.abs(m)))):
                raise ValueError("transport matrix has a non-vanishing imaginary part")
            m = m.real
        m = np.array(m, dtype=float)
        if not np.all(np.isfinite(m)):
            raise ValueError("transport matrix must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2

    def __call__(self, z):
        if isinstance(z, PhasePoint):
            return PhasePoint.from_vector(self.matrix @ z.vector)
        return self.matrix @ np.asarray(z, dtype=float)

    def inv(self) -> "TransportMatrix":
        return TransportMatrix(np.linalg.inv(self.matrix))

    def __matmul__(self, other: "TransportMatrix") -> "TransportMatrix":
        return TransportMatrix(self.matrix @ other.matrix)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))


# ---------------------------------------------------------------------------
# operations


def moebius(S: ComplexSymplectic, alpha) -> WidthParameter:
    """Fractional-linear action ``(A a + B)(C a + D)^{-1}``.

    The image is returned unchecked; it may leave the upper half-space.
    """
    alpha = as_width(alpha, check=False)
    A, B, C, D = S.blocks
    a = alpha.value
    num = A @ a + B
    den = C @ a + D
    if S.n == 1:
        scale = abs(C[0, 0] * a[0, 0]) + abs(D[0, 0])
        if abs(den[0, 0]) <= 1e-14 * max(scale, 1e-300):
            raise PoleError(alpha.scalar)
        return WidthParameter(num / den, check=False)
    if np.linalg.cond(den) > 1e12:
        raise PoleError(alpha.value)
    out = num @ np.linalg.inv(den)
    return WidthParameter(0.5 * (out + out.T), check=False)


def solve_center(beta: WidthParameter, target: np.ndarray) -> np.ndarray:
    """Real ``(q, p)`` with ``q + beta p = target`` (complex n-vector)."""
    b = beta.value
    im = b.imag
    if beta.n == 1:
        if abs(im[0, 0]) <= 1e-300:
            raise DegenerateWidthError(f"Im(beta) vanishes for beta={beta.scalar}")
    elif np.linalg.cond(im) > 1e12:
        raise DegenerateWidthError("Im(beta) is singular")
    target = np.asarray(target, dtype=complex)
    p = np.linalg.solve(im, target.imag)
    q = target.real - b.real @ p
    return np.concatenate([q, p])


def transport_with(beta: WidthParameter, point_map: np.ndarray) -> TransportMatrix:
    """Real map ``z -> (q', p')`` solving ``q' + beta p' = (Mz)_q + beta (Mz)_p``."""
    n = beta.n
    M = np.asarray(point_map, dtype=complex)
    coeff = M[:n, :] + beta.value @ M[n:, :]  # complex n x 2n
    cols = [solve_center(beta, coeff[:, k]) for k in range(2 * n)]
    return TransportMatrix(np.array(cols).T)


def transport_matrix(S: ComplexSymplectic, alpha) -> TransportMatrix:
    """Transport of centres as defined with ``beta = S.alpha`` and point map ``S``."""
    beta = moebius(S, alpha)
    return transport_with(beta, S.matrix)


def kernel_transport(S: ComplexSymplectic, alpha) -> TransportMatrix:
    """Centre transport realised by the Gaussian kernel of ``S``.

    The kernel conjugates ``(X, P)`` by ``[[A, -B], [-C, D]]``, so centres move
    by that matrix (solved at width ``S.alpha``).  For ``A = D`` this equals
    the transport built from ``S^{-1}``.
    """
    beta = moebius(S, alpha)
    return transport_with(beta, S.momentum_flipped().matrix)


def flow_map(S: ComplexSymplectic, point: ExtendedPoint, transport=transport_matrix) -> ExtendedPoint:
    beta = moebius(S, point.alpha)
    T = transport(S, point.alpha)
    return ExtendedPoint(T(point.z), WidthParameter(beta.value, check=False))


def symplectic_form(z1: PhasePoint, z2: PhasePoint) -> float:
    """``z1 ^ z2 = p1 . q2 - q1 . p2``."""
    if z1.n != z2.n:
        raise ValueError("dimension mismatch")
    return float(z1.p @ z2.q - z1.q @ z2.p)


def _flow_candidates(S, S2, transport=transport_matrix):
    def compose(X, Y):
        return lambda pt: flow_map(X, flow_map(Y, pt, transport), transport)

    return {
        "Phi_S o Phi_S2": compose(S, S2),
        "Phi_S2 o Phi_S": compose(S2, S),
        "Phi_S^-1 o Phi_S2^-1": compose(S.inv(), S2.inv()),
        "Phi_S2^-1 o Phi_S^-1": compose(S2.inv(), S.inv()),
    }


def _point_distance(a: ExtendedPoint, b: ExtendedPoint) -> float:
    return float(max(np.max(np.abs(a.z.vector - b.z.vector)), np.max(np.abs(a.alpha.value - b.alpha.value))))


def flow_composition_audit(S, S2, samples, tol: float = 1e-9, transport=transport_matrix) -> AuditReport:
    """Compare ``Phi_{S S2}`` with the four composition orders.

    ``transport`` selects the centre map of the flow: the defining
    :func:`transport_matrix` or the kernel-realised :func:`kernel_transport`.

    Samples where some candidate hits a pole or a degenerate width are
    recorded as counterexamples with an infinite residual for that candidate.
    """
    report = AuditReport("flow composition", tol)
    cands = _flow_candidates(S, S2, transport)
    worst = dict.fromkeys(cands, 0.0)
    for pt in samples:
        target = flow_map(S @ S2, pt, transport)
        row = {"z": pt.z.vector.tolist(), "alpha": _c(pt.alpha)}
        for name, fn in cands.items():
            try:
                r = _point_distance(fn(pt), target)
            except (PoleError, DegenerateWidthError):
                r = float("inf")
            worst[name] = max(worst[name], r)
            row[name] = r
        if all(row[k] > tol for k in cands):
            report.counterexamples.append(row)
    report.residuals = worst
    return report


def _c(w: WidthParameter):
    return [[float(x.real), float(x.imag)] for x in w.value.ravel()]


def admissible_alpha_search(S: ComplexSymplectic, grid_density: int = 64) -> WidthParameter | None:
    """Scan the upper half-plane for a width admissible for ``S``.

    Candidates ``x + iy`` with ``x in [-10, 10]`` (uniform) and ``y in (0, 10]``
    (logarithmic) are visited in order of increasing hyperbolic distance from
    ``i``, ties broken row-major.  Returns ``None`` when the region is exhausted.
    """
    if S.n != 1:
        raise ValueError("search is implemented for n = 1")
    k = max(int(grid_density), 2)
    xs = np.linspace(-10.0, 10.0, 2 * k + 1)
    ys = np.unique(np.concatenate([np.logspace(-3, 1, k), [1.0]]))
    cands = [complex(x, y) for y, x in itertools.product(ys, xs)]
    cands.sort(key=lambda a: abs(a - 1j) ** 2 / a.imag)
    Sinv = S.inv()
    checks = [Sinv, S.conj().inv(), Sinv @ S.conj()]
    for a in cands:
        ok = True
        for V in checks:
            try:
                b = moebius(V, a).scalar
            except PoleError:
                ok = False
                break
            if not (np.isfinite(b) and b.imag > 0):
                ok = False
                break
        if ok:
            return WidthParameter(a)
    return None


def is_admissible_triple(S: ComplexSymplectic, alpha) -> bool:
    """The three Möbius images required by the off-diagonal representation."""
    Sinv = S.inv()
    for V in (Sinv, S.conj().inv(), Sinv @ S.conj()):
        try:
            if not moebius(V, alpha).admissible:
                return False
        except PoleError:
            return False
    return True
