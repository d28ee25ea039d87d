"""Gaussian integral kernels of complex symplectic matrices and their audits.

Three charts realise the same operator ``U(S)``:

``b-chart``
    direct quadrature of ``exp(-(i/2hbar)(x.DB^{-1}x - 2x.B^{-T}y + y.B^{-1}Ay))``
    with prefactor ``(2 pi hbar)^{-n/2} det(B)^{-1/2}``;
``a-chart``
    the Fourier-side form ``det(A)^{-1/2} exp(-(i/2hbar) x.CA^{-1}x)``
    ``x F^{-1}[exp((i/2hbar) xi.A^{-1}B xi) F psi](A^{-1} x)``;
``delta-limit``
    the a-chart with ``B = 0``, a chirp times a band-limited dilation.

The kernel satisfies ``U^{-1} (X, P) U = [[A, -B], [-C, D]] (X, P)``, so
``U(S) U(S') ~ U(S S')``.  Charts agree up to a constant phase; the a-chart
and delta-limit chart are normalised so that ``U(I)`` is exactly the identity.
Growing factors (backward heat flow, multiplication by ``exp(+t x^2)``) are
truncated where their modulus exceeds ``gain_cap``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from .coherent import CoherentLabel, coherent_state
from .errors import ChartError, ComplexFlowError, FitError, UnderresolvedError
from .grid import (
    GridSpec,
    OperatorMatrix,
    WaveFunction,
    fourier_matrix,
    fourier_transform,
    gaussian_fit,
    inner_product,
    momentum_apply,
    position_apply,
)
from .report import AuditReport
from .symplectic import (
    ComplexSymplectic,
    PhasePoint,
    WidthParameter,
    moebius,
    symplectic_form,
    transport_matrix,
    transport_with,
)

DEFAULT_GAIN_CAP = 1e8
_ROW_CHUNK = 512


def _points(grid: GridSpec) -> np.ndarray:
    return np.stack([m.ravel() for m in grid.mesh()], axis=1)


def _dual_points(grid: GridSpec) -> np.ndarray:
    return _points(grid.dual())


def _sqrt_det(M: np.ndarray) -> complex:
    if M.shape[0] == 1:
        return complex(np.sqrt(complex(M[0, 0])))
    return complex(np.prod(np.sqrt(np.linalg.eigvals(M).astype(complex))))


def _quad_rows(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return np.einsum("ij,jk,ik->i", P, Q, P)


# ---------------------------------------------------------------------------
# chart data


@dataclass(frozen=True)
class _BChart:
    M: np.ndarray  # D B^{-1}
    N: np.ndarray  # B^{-T}
    K: np.ndarray  # B^{-1} A
    pref: complex

    @classmethod
    def of(cls, S: ComplexSymplectic, grid: GridSpec) -> "_BChart":
        A, B, C, D = S.blocks
        Binv = np.linalg.inv(B)
        pref = (2 * np.pi * grid.hbar) ** (-grid.n / 2) / _sqrt_det(B)
        return cls(D @ Binv, Binv.T, Binv @ A, pref)

    def form(self) -> np.ndarray:
        return np.block([[self.M, -self.N], [-self.N.T, self.K]])

    def rows(self, grid: GridSpec, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        h = grid.hbar
        phase = _quad_rows(X, self.M)[:, None] - 2 * X @ self.N @ Y.T + _quad_rows(Y, self.K)[None, :]
        return self.pref * np.exp(-0.5j / h * phase)


@dataclass(frozen=True)
class _AChart:
    Ainv: np.ndarray
    chirp: np.ndarray  # on x nodes
    mult: np.ndarray  # on xi nodes
    pref: complex
    gain_cap: float

    @classmethod
    def of(cls, S: ComplexSymplectic, grid: GridSpec, gain_cap: float) -> "_AChart":
        A, B, C, D = S.blocks
        Ainv = np.linalg.inv(A)
        h = grid.hbar
        X = _points(grid)
        Xi = _dual_points(grid)
        with np.errstate(over="ignore"):
            chirp = np.exp(-0.5j / h * _quad_rows(X, C @ Ainv))
            mult = np.exp(0.5j / h * _quad_rows(Xi, Ainv @ B))
        chirp[~(np.abs(chirp) <= gain_cap)] = 0.0
        mult[~(np.abs(mult) <= gain_cap)] = 0.0
        return cls(Ainv, chirp, mult, 1.0 / _sqrt_det(A), gain_cap)

    def synthesis_rows(self, grid: GridSpec, X: np.ndarray) -> np.ndarray:
        """Rows of ``xi -> exp(i x.A^{-T} xi / hbar) dxi^n / (2 pi hbar)^{n/2}``."""
        Xi = _dual_points(grid)
        with np.errstate(over="ignore"):
            E = np.exp(1j / grid.hbar * (X @ self.Ainv.T) @ Xi.T)
        E[~(np.abs(E) <= self.gain_cap)] = 0.0
        return E * (grid.dxi / np.sqrt(2 * np.pi * grid.hbar)) ** grid.n


def _forward_matrix(grid: GridSpec) -> np.ndarray:
    F1 = fourier_matrix(GridSpec(1, grid.L, grid.N, grid.hbar))
    return F1 if grid.n == 1 else np.kron(F1, F1)


def _is_identity_dilation(Ainv: np.ndarray) -> bool:
    return bool(np.allclose(Ainv, np.eye(Ainv.shape[0]), rtol=0, atol=1e-14))


def bchart_status(S: ComplexSymplectic, grid: GridSpec) -> tuple[bool, str]:
    """Whether the direct quadrature chart is bounded and resolved on ``grid``."""
    A, B, C, D = S.blocks
    if np.linalg.cond(B) > 1e8 or np.max(np.abs(B)) < 1e-8:
        return False, "B is singular"
    ch = _BChart.of(S, grid)
    Q = ch.form()
    herm_im = 0.5 * (Q.imag + Q.imag.T)
    ev = np.linalg.eigvalsh(herm_im)
    if ev.max() > 1e-10 * max(1.0, np.abs(ev).max()):
        return False, "kernel grows off the diagonal"
    # phase wavenumber bound over the box |x|, |y| <= L
    kmax = np.abs(Q.real).sum(axis=1).max() * grid.L / grid.hbar
    if kmax * grid.dx >= np.pi:
        return False, f"quadratic phase underresolved (k dx = {kmax * grid.dx:.3g})"
    # Gaussian envelope must span several nodes
    if -ev.min() * grid.dx**2 / grid.hbar > 0.25:
        return False, "Gaussian envelope narrower than the grid spacing"
    return True, "ok"


def choose_chart(S: ComplexSymplectic, grid: GridSpec) -> str:
    A, B, C, D = S.blocks
    if np.max(np.abs(B)) < 1e-8:
        return "delta-limit"
    ok, reason = bchart_status(S, grid)
    if ok:
        return "b-chart"
    if np.linalg.cond(A) < 1e8:
        return "a-chart"
    raise UnderresolvedError(f"no usable chart for S on this grid: {reason}")


# ---------------------------------------------------------------------------
# public API


@dataclass(frozen=True)
class MetaplecticKernel:
    S: ComplexSymplectic
    grid: GridSpec
    matrix: OperatorMatrix
    chart: str

    def apply(self, psi: WaveFunction) -> WaveFunction:
        from .grid import operator_apply

        return operator_apply(self.matrix, psi)


def _check_dims(S: ComplexSymplectic, grid: GridSpec):
    if S.n != grid.n:
        raise ValueError(f"S is {2 * S.n}x{2 * S.n} but the grid has dimension {grid.n}")


def kernel_build(
    S: ComplexSymplectic, grid: GridSpec, chart: str | None = None, gain_cap: float = DEFAULT_GAIN_CAP
) -> MetaplecticKernel:
    """Dense kernel of ``U(S)`` on ``grid``.

    ``chart`` is chosen automatically unless given.  Entries are kernel values,
    so :func:`~complexflow.grid.operator_apply` integrates against them.
    """
    _check_dims(S, grid)
    chart = chart or choose_chart(S, grid)
    X = _points(grid)
    if chart == "b-chart":
        ok, reason = bchart_status(S, grid)
        if not ok and "underresolved" in reason:
            raise UnderresolvedError(f"grid underresolved: {reason}")
        K = _BChart.of(S, grid).rows(grid, X, X)
        return MetaplecticKernel(S, grid, OperatorMatrix(grid, K), chart)
    if chart not in ("a-chart", "delta-limit"):
        raise ChartError(f"unknown chart {chart!r}")
    A = S.blocks[0]
    if np.linalg.cond(A) > 1e8:
        raise ChartError("A is singular; the Fourier-side chart is unavailable")
    ac = _AChart.of(S, grid, gain_cap)
    E = ac.synthesis_rows(grid, X)
    F = _forward_matrix(grid)
    mat = (ac.pref * ac.chirp)[:, None] * ((E * ac.mult[None, :]) @ F)
    return MetaplecticKernel(S, grid, OperatorMatrix.from_matrix(grid, mat), chart)


def kernel_apply(
    S: ComplexSymplectic,
    psi: WaveFunction,
    chart: str | None = None,
    gain_cap: float = DEFAULT_GAIN_CAP,
    noise_floor: float = 1e-14,
) -> WaveFunction:
    """``U(S) psi`` without forming the dense kernel.

    On Fourier-side charts, spectral components of ``psi`` below
    ``noise_floor`` times its spectral maximum are dropped wherever the
    multiplier amplifies, so repeated growing factors do not blow up roundoff.
    """
    grid = psi.grid
    _check_dims(S, grid)
    chart = chart or choose_chart(S, grid)
    X = _points(grid)
    out = np.empty(grid.size, dtype=complex)
    if chart == "b-chart":
        ch = _BChart.of(S, grid)
        v = psi.flat * grid.weight
        for i0 in range(0, grid.size, _ROW_CHUNK):
            out[i0 : i0 + _ROW_CHUNK] = ch.rows(grid, X[i0 : i0 + _ROW_CHUNK], X) @ v
        return WaveFunction(grid, out)
    ac = _AChart.of(S, grid, gain_cap)
    spec = fourier_transform(psi).flat
    if noise_floor:
        # amplifying roundoff is the dominant error of backward-heat factors
        spec = np.where((np.abs(ac.mult) > 1) & (np.abs(spec) < noise_floor * np.abs(spec).max()), 0.0, spec)
    spec = spec * ac.mult
    if _is_identity_dilation(ac.Ainv):
        back = fourier_transform(WaveFunction(grid.dual(), spec), "inverse").flat
        return WaveFunction(grid, ac.pref * ac.chirp * back)
    for i0 in range(0, grid.size, _ROW_CHUNK):
        out[i0 : i0 + _ROW_CHUNK] = ac.synthesis_rows(grid, X[i0 : i0 + _ROW_CHUNK]) @ spec
    return WaveFunction(grid, ac.pref * ac.chirp * out)


def realized_matrix(S: ComplexSymplectic) -> np.ndarray:
    """Matrix ``M`` with ``U(S)^{-1} Z U(S) = M Z`` for ``Z = (X, P)``."""
    return S.momentum_flipped().matrix


def closed_form_propagate(S: ComplexSymplectic, label: CoherentLabel, hbar: float = 0.5):
    """Predicted image of a coherent state under the printed propagation rule.

    Returns the label ``(S.alpha, T z)`` with ``T = transport_matrix(S, alpha)``
    and the scalar ``det(A + B alpha^{-1})^{-1/2}
    (det Im (S.alpha)^{-1} / det Im alpha^{-1})^{1/4} exp(i S(z) ^ T z / 2 hbar)``.
    This is a hypothesis: :func:`convention_audit` tests it against the kernel.
    """
    from .errors import AdmissibilityError

    alpha = label.alpha
    beta = moebius(S, alpha)
    if not beta.admissible:
        raise AdmissibilityError(f"S.alpha = {beta} leaves the upper half-space")
    A, B, C, D = S.blocks
    a = alpha.value
    T = transport_matrix(S, alpha)
    z = label.z.vector
    w = T(z)
    Sz = S.matrix @ z
    n = label.n
    phase = np.exp(1j * _wedge(Sz, w, n) / (2 * hbar))
    ratio = abs(np.linalg.det(np.linalg.inv(beta.value).imag) / np.linalg.det(np.linalg.inv(a).imag))
    g = ratio**0.25 / _sqrt_det(A + B @ np.linalg.inv(a))
    return CoherentLabel(PhasePoint.from_vector(w), WidthParameter(beta.value)), complex(g * phase)


def _wedge(z1, z2, n: int) -> complex:
    z1 = np.asarray(z1)
    z2 = np.asarray(z2)
    return complex(z1[n:] @ z2[:n] - z1[:n] @ z2[n:])


def realized_propagate(S: ComplexSymplectic, label: CoherentLabel, hbar: float = 0.5, chart: str = "a-chart"):
    """Image label and scalar of a coherent state under the kernel convention.

    Width ``beta = S.alpha``; complex centre ``w = M z`` with ``M`` from
    :func:`realized_matrix`; real centre ``w'`` solving ``q' + beta p' =
    w_q + beta w_p``; scalar ``g exp(i w ^ w' / 2 hbar)``.  The factor ``g``
    maps the centred state and carries the normalisation ratio
    ``(det Im alpha^{-1} / det Im beta^{-1})^{1/4}``; its phase follows the
    branch conventions of ``chart``.
    """
    alpha = label.alpha
    beta = moebius(S, alpha)
    A, B, C, D = S.blocks
    a = alpha.value
    n = label.n
    M = realized_matrix(S)
    z = label.z.vector
    w = M @ z
    wr = transport_with(beta, M)(z)
    ratio = abs(np.linalg.det(np.linalg.inv(a).imag) / np.linalg.det(np.linalg.inv(beta.value).imag))
    if chart == "b-chart":
        g = 1.0 / (_sqrt_det(B) * _sqrt_det(1j * (np.linalg.inv(B) @ A + np.linalg.inv(a))))
    else:
        gamma = a + np.linalg.inv(A) @ B
        g = _sqrt_det(a / 1j) * _sqrt_det(1j * np.linalg.inv(gamma)) / _sqrt_det(A)
    phase = np.exp(1j * _wedge(w, wr, n) / (2 * hbar))
    return CoherentLabel(PhasePoint.from_vector(wr), WidthParameter(beta.value, check=False)), complex(g * ratio**0.25 * phase)


def propagator(
    S: ComplexSymplectic, grid: GridSpec, gain_cap: float = DEFAULT_GAIN_CAP, chart: str | None = None
):
    """Return ``(apply, chart)`` where ``apply(psi)`` computes ``U(S) psi``.

    Kernels are assembled once and reused, except Fourier-side charts without
    dilation, which stay matrix-free.
    """
    _check_dims(S, grid)
    chart = chart or choose_chart(S, grid)
    A = S.blocks[0]
    if chart == "b-chart" or not _is_identity_dilation(np.linalg.inv(A)):
        K = kernel_build(S, grid, chart=chart, gain_cap=gain_cap).matrix.matrix

        def apply(psi: WaveFunction) -> WaveFunction:
            return WaveFunction(grid, K @ psi.flat)

    else:

        def apply(psi: WaveFunction) -> WaveFunction:
            return kernel_apply(S, psi, chart=chart, gain_cap=gain_cap)

    return apply, chart


# ---------------------------------------------------------------------------
# convention audit

FAMILIES = {
    "width S.alpha, centres by S": (False, False),
    "width S.alpha, centres by S^-1": (False, True),
    "width S^-1.alpha, centres by S": (True, False),
    "width S^-1.alpha, centres by S^-1": (True, True),
}


def family_prediction(name: str, S: ComplexSymplectic, alpha, z) -> tuple[WidthParameter, np.ndarray]:
    inv_width, inv_points = FAMILIES[name]
    beta = moebius(S.inv() if inv_width else S, alpha)
    V = S.inv() if inv_points else S
    return beta, transport_with(beta, V.matrix)(np.asarray(z, dtype=float))


def _sigma(n: int) -> np.ndarray:
    return np.diag(np.r_[np.ones(n), -np.ones(n)])


META_VARIANTS = {
    "U^-1 Z U = S Z": lambda S: S.matrix,
    "U^-1 Z U = S^-1 Z": lambda S: S.inv().matrix,
    "U^-1 Z U = sigma S sigma Z": lambda S: _sigma(S.n) @ S.matrix @ _sigma(S.n),
    "U^-1 Z U = sigma S^-1 sigma Z": lambda S: _sigma(S.n) @ S.inv().matrix @ _sigma(S.n),
}


def _z_components(psi: WaveFunction) -> list[WaveFunction]:
    n = psi.grid.n
    return [position_apply(psi, k) for k in range(n)] + [momentum_apply(psi, k) for k in range(n)]


def meta_residuals(
    S: ComplexSymplectic, probes: Iterable[WaveFunction], gain_cap: float = DEFAULT_GAIN_CAP
) -> dict[str, float]:
    """Worst ``|| Z_j U psi - U (M Z)_j psi || / ||psi||`` over probes and components."""
    out = dict.fromkeys(META_VARIANTS, 0.0)
    probes = list(probes)
    if not probes:
        return out
    U, _ = propagator(S, probes[0].grid, gain_cap)
    for psi in probes:
        lhs = _z_components(U(psi))
        uz = [U(v).flat for v in _z_components(psi)]
        nrm = psi.norm()
        for name, fn in META_VARIANTS.items():
            M = fn(S)
            for j in range(2 * S.n):
                rhs = sum(M[j, k] * uz[k] for k in range(2 * S.n))
                r = np.linalg.norm(lhs[j].flat - rhs) * np.sqrt(psi.grid.weight) / nrm
                out[name] = max(out[name], float(r))
    return out


@dataclass
class ConventionReport:
    cases: list[dict[str, Any]] = field(default_factory=list)
    family_residuals: dict[str, float] = field(default_factory=dict)
    meta_residuals: dict[str, float] = field(default_factory=dict)
    tolerance: float = 1e-6
    notes: list[str] = field(default_factory=list)

    @property
    def matching(self) -> list[str]:
        return [k for k, r in self.family_residuals.items() if r <= self.tolerance]

    @property
    def best_family(self) -> str | None:
        m = self.matching
        return m[0] if len(m) == 1 else None

    @property
    def meta_arrangement(self) -> str | None:
        if not self.meta_residuals:
            return None
        return min(self.meta_residuals, key=self.meta_residuals.get)

    def to_dict(self) -> dict[str, Any]:
        return {
            "cases": self.cases,
            "family_residuals": self.family_residuals,
            "matching": self.matching,
            "best_family": self.best_family if self.best_family else "unresolved",
            "meta_residuals": self.meta_residuals,
            "meta_arrangement": self.meta_arrangement,
            "tolerance": self.tolerance,
            "notes": self.notes,
        }


def _cplx(v) -> list:
    return [[float(np.real(x)), float(np.imag(x))] for x in np.ravel(v)]


def convention_audit(
    S_set: Iterable[ComplexSymplectic],
    alpha_set: Iterable,
    z_set: Iterable,
    grid: GridSpec,
    tol: float = 1e-6,
    gain_cap: float = DEFAULT_GAIN_CAP,
    meta: bool = True,
) -> ConventionReport:
    """Fit kernel-propagated coherent states and score the four families.

    Each family fixes the width hypothesis (``S.alpha`` or ``S^{-1}.alpha``)
    and the map whose image centre is projected to a real point (``S`` or
    ``S^{-1}``).  A family's residual is its worst label error over all cases.
    """
    report = ConventionReport(tolerance=tol)
    report.family_residuals = dict.fromkeys(FAMILIES, 0.0)
    report.meta_residuals = dict.fromkeys(META_VARIANTS, 0.0)
    alphas = list(alpha_set)
    zs = list(z_set)
    for S in S_set:
        probes = []
        try:
            U, chart = propagator(S, grid, gain_cap)
        except ComplexFlowError as exc:
            report.cases.append({"S": _cplx(S.matrix), "error": str(exc)})
            for k in FAMILIES:
                report.family_residuals[k] = float("inf")
            continue
        for alpha in alphas:
            for z in zs:
                label = CoherentLabel(PhasePoint.from_vector(z), alpha)
                psi = coherent_state(label, grid)
                probes.append(psi)
                case: dict[str, Any] = {"S": _cplx(S.matrix), "alpha": _cplx(label.alpha.value), "z": list(map(float, z))}
                try:
                    fit = gaussian_fit(U(psi))
                except (FitError, ComplexFlowError) as exc:
                    case["error"] = str(exc)
                    report.cases.append(case)
                    for k in FAMILIES:
                        report.family_residuals[k] = float("inf")
                    continue
                fz = fit.z.vector
                case["fitted"] = {
                    "beta": _cplx(fit.beta.value),
                    "w": fz.tolist(),
                    "lambda": _cplx(fit.lam),
                    "residual": fit.residual,
                }
                fam = {}
                for name in FAMILIES:
                    try:
                        beta, w = family_prediction(name, S, label.alpha, z)
                        r = max(np.abs(beta.value - fit.beta.value).max(), np.abs(w - fz).max())
                    except ComplexFlowError:
                        r = float("inf")
                    fam[name] = float(r)
                    report.family_residuals[name] = max(report.family_residuals[name], float(r))
                case["family_residuals"] = fam
                case["best_family"] = min(fam, key=fam.get)
                try:
                    _, printed = closed_form_propagate(S, label, grid.hbar)
                    case["scalar_ratio_printed"] = _cplx(fit.lam / printed)
                except ComplexFlowError as exc:
                    case["scalar_ratio_printed"] = str(exc)
                _, realized = realized_propagate(S, label, grid.hbar, chart)
                case["scalar_ratio_realized"] = _cplx(fit.lam / realized)
                report.cases.append(case)
        if meta and probes:
            for k, v in meta_residuals(S, probes[:4], gain_cap).items():
                report.meta_residuals[k] = max(report.meta_residuals[k], v)
    return report


def kernel_compose_check(
    S: ComplexSymplectic,
    S2: ComplexSymplectic,
    grid: GridSpec,
    probes: Iterable[CoherentLabel],
    tol: float = 1e-6,
    gain_cap: float = DEFAULT_GAIN_CAP,
) -> AuditReport:
    """``min_c ||U(S)U(S2)psi - c U(S S2) psi|| / ||psi||`` per probe."""
    report = AuditReport("kernel composition", tol)
    worst = 0.0
    scalars = []
    U1, _ = propagator(S, grid, gain_cap)
    U2, _ = propagator(S2, grid, gain_cap)
    U12, _ = propagator(S @ S2, grid, gain_cap)
    for lab in probes:
        psi = coherent_state(lab, grid)
        u = U1(U2(psi))
        v = U12(psi)
        vv = inner_product(v, v)
        c = inner_product(v, u) / vv if abs(vv) > 0 else 0.0
        r = (u + v * (-c)).norm() / psi.norm()
        scalars.append(c)
        worst = max(worst, r)
    report.residuals["U(S)U(S2) = c U(S S2)"] = float(worst)
    report.notes.append("scalars: " + ", ".join(f"{c:.6g}" for c in scalars))
    return report


def unitarity_defect(S: ComplexSymplectic, probes: Iterable[CoherentLabel], grid: GridSpec) -> float:
    U, _ = propagator(S, grid)
    return max(abs(U(coherent_state(lab, grid)).norm() - 1.0) for lab in probes)


def fourier_kernel_check(grid: GridSpec) -> float:
    """Distance between the quarter-turn kernel and the inverse Fourier transform.

    Meaningful on self-dual grids, where ``L**2 = pi hbar N / 2``.
    """
    S = ComplexSymplectic.from_entries(0, 1, -1, 0)
    K = kernel_build(S, grid, chart="b-chart").matrix.matrix
    Finv = fourier_matrix(grid.dual(), "inverse")
    return float(np.abs(K - Finv).max())
