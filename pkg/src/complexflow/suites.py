"""Verification suites: one function per checked property, each returning ``Check`` records.

Every function takes an optional grid override; defaults are the grids the
tolerances were set for.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .coherent import CoherentLabel, coherent_state, overlap_closed_form
from .errors import ComplexFlowError
from .grid import GridSpec, dyad, inner_product, operator_apply
from .metaplectic import (
    FAMILIES,
    META_VARIANTS,
    convention_audit,
    kernel_compose_check,
    meta_residuals,
    propagator,
    unitarity_defect,
)
from .quantize import (
    comp_symbol,
    idempotency_defect,
    offdiag_quantize,
    phase_nodes,
    phase_window,
    relative_residual,
    single_dyad_projector,
    substitute,
    theorem1_build,
    toeplitz_quantize,
    _columns,
)
from .report import Check, check, info
from .symbols import SymbolField, reparametrize, weyl_pushforward_check, weyl_rank_one, wigner_numeric
from .symplectic import (
    ComplexSymplectic,
    ExtendedPoint,
    PhasePoint,
    as_width,
    flow_composition_audit,
    kernel_transport,
    moebius,
)
from .grid import gaussian_fit
from .tables import compute_table

ALPHAS = (1j, 2j, 1 + 1j, 0.3 + 0.7j)
POINTS = ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (2.0, -1.0))


def _S(m) -> ComplexSymplectic:
    return ComplexSymplectic(np.asarray(m, dtype=complex))


def free(t: float) -> ComplexSymplectic:
    return _S([[1, -1j * t], [0, 1]])


def mult(t: float) -> ComplexSymplectic:
    return _S([[1, 0], [-1j * t, 1]])


def oscillator(t: float) -> ComplexSymplectic:
    return _S([[np.cosh(t), 1j * np.sinh(t)], [-1j * np.sinh(t), np.cosh(t)]])


def rotation(th: float) -> ComplexSymplectic:
    return _S([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])


def shear(s: float) -> ComplexSymplectic:
    return _S([[1, s], [0, 1]])


def vshear(s: float) -> ComplexSymplectic:
    return _S([[1, 0], [s, 1]])


def complex_case_set() -> dict[str, ComplexSymplectic]:
    return {
        "free ev. t=0.1": free(0.1),
        "free ev. t=0.25": free(0.25),
        "x exp(-t x^2) t=0.1": mult(0.1),
        "x exp(-t x^2) t=0.25": mult(0.25),
        "oscillator t=0.2": oscillator(0.2),
    }


def real_case_set() -> dict[str, ComplexSymplectic]:
    return {
        "rotation 0.3": rotation(0.3),
        "rotation pi/2": rotation(np.pi / 2),
        "rotation 1.2": rotation(1.2),
        "shear 0.5": shear(0.5),
        "vertical shear -0.7": vshear(-0.7),
    }


# core ---------------------------------------------------------------------

def coherent_normalization(grid: GridSpec | None = None) -> list[Check]:
    g = grid or GridSpec(1, 20.0, 2048, 0.5)
    err = max(
        abs(coherent_state(CoherentLabel.of(q, p, a), g).norm() - 1.0) for a in ALPHAS for q, p in POINTS
    )
    return [check("coherent normalization", err, 1e-9, f"{len(ALPHAS) * len(POINTS)} states")]


def _random_labels(rng, count: int):
    for _ in range(count):
        q, p = rng.uniform(-3, 3, size=2)
        a = complex(rng.uniform(-1, 1), rng.uniform(0.3, 2.0))
        yield CoherentLabel.of(q, p, a)


def overlap_oracle(grid: GridSpec | None = None, pairs: int = 20, seed: int = 0) -> list[Check]:
    g = grid or GridSpec(1, 20.0, 2048, 0.5)
    rng = np.random.default_rng(seed)
    labs = list(_random_labels(rng, 2 * pairs))
    err = 0.0
    for a, b in zip(labs[::2], labs[1::2]):
        num = inner_product(coherent_state(a, g), coherent_state(b, g))
        err = max(err, abs(overlap_closed_form(a, b, g.hbar) - num))
    return [check("overlap closed form vs grid", err, 1e-8, f"{pairs} random pairs")]


def moebius_left_action(samples: int = 200, seed: int = 1) -> list[Check]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    used = 0
    for _ in range(samples):
        m1 = np.eye(2) + 0.3 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        m2 = np.eye(2) + 0.3 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        S1 = _S(m1 / np.sqrt(np.linalg.det(m1)))
        S2 = _S(m2 / np.sqrt(np.linalg.det(m2)))
        a = complex(rng.uniform(-1, 1), rng.uniform(0.3, 2))
        try:
            lhs = moebius(S1 @ S2, a).scalar
            rhs = moebius(S1, moebius(S2, as_width(a)).value).scalar
        except ComplexFlowError:
            continue
        used += 1
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return [check("moebius left action", worst, 1e-10, f"{used} triples")]


def symplectic_invariants() -> list[Check]:
    worst = 0.0
    for S in list(complex_case_set().values()) + list(real_case_set().values()):
        worst = max(worst, abs(np.linalg.det(S.matrix) - 1.0), float(np.abs((S @ S.inv()).matrix - np.eye(2)).max()))
    return [check("symplectic invariants (det, inverse)", worst, 1e-12)]


def flow_audit() -> list[Check]:
    rng = np.random.default_rng(2)
    pairs = [(free(0.1), mult(0.1)), (oscillator(0.2), free(0.05)), (rotation(0.4), mult(0.2))]
    samples = [
        ExtendedPoint(PhasePoint(q, p), as_width(complex(x, y)))
        for q, p, x, y in zip(rng.uniform(-2, 2, 8), rng.uniform(-2, 2, 8), rng.uniform(-0.5, 0.5, 8), rng.uniform(0.5, 2, 8))
    ]
    out = []
    definitive = True
    for S, S2 in pairs:
        rep = flow_composition_audit(S, S2, samples)
        definitive = definitive and rep.definitive
        best = min(rep.residuals, key=rep.residuals.get)
        out.append(info(f"flow composition best candidate: {best}", rep.residuals[best],
                        f"matching={rep.matching} counterexamples={len(rep.counterexamples)}"))
        krep = flow_composition_audit(S, S2, samples, transport=kernel_transport)
        out.append(info("kernel-transport flow, Phi_S o Phi_S2", krep.residuals["Phi_S o Phi_S2"]))
    out.append(check("flow audit definitive on every pair", 0.0 if definitive else 1.0, 0.0))
    return out + moebius_left_action()


# metaplectic --------------------------------------------------------------

def _probes(n: int = 1):
    if n == 1:
        return [CoherentLabel.of(0.0, 0.0, 1j), CoherentLabel.of(0.7, -0.4, 1 + 1j), CoherentLabel.of(-1.0, 0.5, 0.5j)]
    return [CoherentLabel.of([0.3, -0.2], [0.1, 0.4], np.diag([1j, 1j]))]


def real_metaplectic(grid: GridSpec | None = None) -> list[Check]:
    g = grid or GridSpec(1, 16.0, 1024, 0.5)
    unit = 0.0
    arrangement: dict[str, float] = dict.fromkeys(META_VARIANTS, 0.0)
    for S in real_case_set().values():
        unit = max(unit, unitarity_defect(S, _probes(), g))
        for k, v in meta_residuals(S, [coherent_state(lab, g) for lab in _probes()]).items():
            arrangement[k] = max(arrangement[k], v)
    best = min(arrangement, key=arrangement.get)
    return [
        check("real metaplectic unitarity", unit, 1e-6, "5 real S"),
        check(f"conjugation arrangement '{best}'", arrangement[best], 1e-5),
    ]


def convention(grid: GridSpec | None = None) -> list[Check]:
    g = grid or GridSpec(1, 16.0, 1024, 0.5)
    rep = convention_audit(complex_case_set().values(), [1j], [(0.0, 0.0), (0.5, -0.3)], g, tol=1e-6, meta=False)
    fit = max((c.get("fitted", {}).get("residual", np.inf) for c in rep.cases), default=np.inf)
    out = [check("convention audit fit residual", fit, 1e-6)]
    for name in FAMILIES:
        out.append(info(f"family '{name}'", rep.family_residuals[name]))
    out.append(check(f"exactly one family matches: {rep.best_family or 'unresolved'}",
                     0.0 if rep.best_family else 1.0, 0.0, f"matching={rep.matching}"))
    return out


def kernel_composition(grid: GridSpec | None = None) -> list[Check]:
    g = grid or GridSpec(1, 16.0, 1024, 0.5)
    pairs = [
        (free(0.1), free(0.15)),
        (free(0.1), mult(0.1)),
        (rotation(0.5), free(0.1)),
        (oscillator(0.1), rotation(0.3)),
        (mult(0.1), shear(0.4)),
    ]
    worst = 0.0
    for S, S2 in pairs:
        rep = kernel_compose_check(S, S2, g, _probes())
        worst = max(worst, max(rep.residuals.values()))
    return [check("U(S)U(S') = c U(SS')", worst, 1e-5, "5 pairs")]


# Weyl ---------------------------------------------------------------------

WEYL_PAIRS = (
    ((0.0, 0.0, 1j), (0.0, 0.0, 1j)),
    ((1.0, -0.5, 1j), (1.0, -0.5, 1j)),
    ((0.5, 0.2, 2j), (0.5, 0.2, 2j)),
    ((0.0, 0.0, 1j), (1.0, 0.5, 1j)),
    ((0.3, -0.4, 1 + 1j), (-0.5, 0.6, 0.5j)),
    ((-1.0, 0.0, 2j), (0.5, 1.0, 0.3 + 0.7j)),
)


def weyl_closed_form(grid: GridSpec | None = None, interior: float = 4.0) -> list[Check]:
    g = grid or GridSpec(1, 12.0, 512, 0.5)
    worst = 0.0
    cal = None
    for la, lb in WEYL_PAIRS:
        a, b = CoherentLabel.of(*la), CoherentLabel.of(*lb)
        W = wigner_numeric(dyad(coherent_state(a, g), coherent_state(b, g)))
        C = weyl_rank_one(a, b, W.grid, g.hbar)
        cal = C.metadata["calibration"]
        Q, P = W.grid.mesh()
        m = (np.abs(Q) < interior) & (np.abs(P) < interior)
        worst = max(worst, float(np.abs(W.samples[m] - C.samples[m]).max()))
    return [check("rank-one Weyl closed form vs numeric", worst, 1e-6, f"6 pairs, calibration {cal:.6g}")]


def weyl_pushforward(grid: GridSpec | None = None) -> list[Check]:
    g = grid or GridSpec(1, 12.0, 512, 0.5)
    Hs = {
        "gaussian": toeplitz_quantize(SymbolField.gaussian(1.0, (0.5, -0.3), ((1.0, 0.3), (0.3, 2.0)), g.hbar), 1j, g, 6.0),
        "polynomial bump": toeplitz_quantize(
            SymbolField.from_callable(lambda q, p: (1 + q - 0.5 * p) * np.exp(-(q * q + p * p) / 2), g.hbar), 1j, g, 6.0
        ),
    }
    worst = 0.0
    for S in (rotation(0.6), shear(0.5)):
        for H in Hs.values():
            worst = max(worst, weyl_pushforward_check(H, S, interior=3.0))
    return [check("Weyl push-forward for real S", worst, 1e-3, "2 S x 2 H")]


# off-diagonal -------------------------------------------------------------

def _qgrid(grid):
    return grid or GridSpec(1, 16.0, 512, 0.5)


def toeplitz_identity(grid: GridSpec | None = None, radius: float = 8.0) -> list[Check]:
    g = _qgrid(grid)
    one = SymbolField.constant(1.0, g.hbar)
    ws = [(0.0, 0.0), (2.0, 0.0), (0.0, -2.0), (1.2, 1.2), (-1.0, 1.5)]
    out = []
    for a in (1j, 2j):
        H = toeplitz_quantize(one, a, g, radius)
        err = max(
            abs(inner_product(psi, operator_apply(H, psi)) - 1.0)
            for psi in (coherent_state(CoherentLabel.of(q, p, a), g) for q, p in ws)
        )
        out.append(check(f"Toeplitz identity alpha={a}", err, 1e-3))
    return out


def reparametrization_equality(grid: GridSpec | None = None, radius: float = 8.0) -> list[Check]:
    g = _qgrid(grid)
    h = SymbolField.polynomial({"q^2": 1.0, "q^1 p^1": 0.5, "p^2": 0.75, "q^1": 0.3, "1": 1.0}, g.hbar)
    A = toeplitz_quantize(h, 2j, g, radius)
    B = toeplitz_quantize(reparametrize(h, 2j, 1j), 1j, g, radius)
    r = relative_residual(B, A, window=phase_window(g, 4.0))
    return [check("Toeplitz reparametrization 2i -> i", r, 1e-3, "windowed |z| <= 4")]


def offdiag_reconstruction(grid: GridSpec | None = None, radius: float = 8.0) -> list[Check]:
    g = _qgrid(grid)
    h = SymbolField.gaussian(1.0, (0.3, -0.2), ((1.0, 0.0), (0.0, 1.0)), g.hbar)
    out = []
    for name, S, tol in (
        ("free ev. t=0.25", free(0.25), 5e-2),
        ("x exp(-t x^2) t=0.1", mult(0.1), 5e-2),
        ("rotation 0.5", rotation(0.5), 1e-6),
    ):
        try:
            sym, _ = theorem1_build(h, 1j, S, g, radius, tol=np.inf)
            out.append(check(f"off-diagonal {name} [{sym.metadata['variant']}]", sym.metadata["residual"], tol))
        except ComplexFlowError as exc:
            out.append(Check(f"off-diagonal {name}", "fail", float("inf"), tol, str(exc)))
    return out


def projector(grid: GridSpec | None = None) -> list[Check]:
    g = _qgrid(grid)
    worst = 0.0
    for S in (free(0.25), mult(0.1), rotation(0.5)):
        P, _ = single_dyad_projector(S, CoherentLabel.of(0.4, -0.3, 1j), g)
        worst = max(worst, idempotency_defect(P))
    return [check("single-dyad projector idempotency", worst, 1e-8)]


DET_MINUS = [[0, 1j], [-1j, 0]]


def det_minus_example(grid: GridSpec | None = None, radius: float = 8.0) -> list[Check]:
    g = _qgrid(grid)
    h = SymbolField.gaussian(1.0, (0.5, 0.2), ((1.0, 0.2), (0.2, 0.8)), g.hbar)
    S = _S(DET_MINUS)
    sym = comp_symbol(h, 1j, S)
    op = offdiag_quantize(sym, g, radius)
    nodes = phase_nodes(radius, g.hbar)
    w = h(nodes.q, nodes.p) * nodes.cell / (2 * np.pi * g.hbar)
    kets = _columns(g, -nodes.q, -nodes.p, 1j)
    bras = _columns(g, nodes.q, nodes.p, 1j)
    from .grid import OperatorMatrix

    direct = OperatorMatrix(g, (kets * w[None, :]) @ bras.conj().T)
    r1 = relative_residual(op, direct)
    lhs = offdiag_quantize(substitute(sym, S, g.hbar), g, radius)
    rhs = offdiag_quantize(comp_symbol(h, 1j, S @ S), g, radius)
    r2 = relative_residual(lhs, rhs)
    return [
        check("det -1 composition operator vs parity dyads", r1, 1e-3),
        check("composition law Comp_S Comp_S = Comp_{SS}", r2, 5e-2),
    ]


# tables -------------------------------------------------------------------

FREE_COLUMNS = ("S^-1 conj S", "S^-1 conj S . i", "T_{S^-1 conj S}", "T_{conj S}")


def table_reproduction(t: float = 0.25, hbar: float = 0.5) -> list[Check]:
    rows = compute_table("annb1", t, hbar) + compute_table("annb2", t, hbar)
    free_row = rows[0]
    missing = sum(1 for c in FREE_COLUMNS if not free_row.match.get(c, False))
    silent = sum(1 for r in rows for c in r.printed if c not in r.match or (not r.match[c] and r.computed.get(c) is None and not r.notes))
    flagged = sum(1 for r in rows for ok in r.match.values() if not ok)
    return [
        check("free evolution row matched", float(missing), 0.0),
        check("every cell matched or flagged", float(silent), 0.0),
        info("flagged mismatches", float(flagged)),
    ]


# n = 2 --------------------------------------------------------------------

def _two_dim_cases() -> dict[str, ComplexSymplectic]:
    Z, I = np.zeros((2, 2)), np.eye(2)
    B = np.array([[1.0, 0.3], [0.3, 0.5]])
    t = 0.2
    K = np.diag([1.0, 0.6])
    c, s = np.cos(0.4), np.sin(0.4)
    R = np.array([[c, -s], [s, c]])
    osc = _S(np.block([[np.cosh(t) * I, 1j * np.sinh(t) * K], [-1j * np.sinh(t) * np.linalg.inv(K), np.cosh(t) * I]]))
    return {
        "coupled free ev. t=0.1": _S(np.block([[I, -0.1j * B], [Z, I]])),
        "rotated anisotropic oscillator t=0.2": _S(np.block([[R, Z], [Z, R]])) @ osc,
    }


def two_dimensional(grid: GridSpec | None = None) -> list[Check]:
    g = grid or GridSpec(2, 8.0, 64, 1.0)
    lab = CoherentLabel.of([0.3, -0.2], [0.1, 0.4], np.array([[1j, 0.2], [0.2, 1.5j]]))
    out = []
    for name, S in _two_dim_cases().items():
        U, _ = propagator(S, g)
        fit = gaussian_fit(U(coherent_state(lab, g)))
        err = float(np.abs(fit.beta.value - moebius(S, lab.alpha).value).max())
        out += [check(f"n=2 {name}: fit residual", fit.residual, 1e-2),
                check(f"n=2 {name}: fitted width vs Moebius image", err, 1e-2)]
    return out


SUITES: dict[str, list[Callable[..., list[Check]]]] = {
    "core": [coherent_normalization, overlap_oracle, symplectic_invariants, flow_audit, table_reproduction],
    "metaplectic": [real_metaplectic, convention, kernel_composition],
    "weyl": [weyl_closed_form, weyl_pushforward],
    "offdiag": [toeplitz_identity, reparametrization_equality, offdiag_reconstruction, projector, det_minus_example],
    "ndim": [two_dimensional],
}

GRID_AWARE = {f for fs in SUITES.values() for f in fs if "grid" in f.__code__.co_varnames[: f.__code__.co_argcount]}


def run_suite(name: str, grid: GridSpec | None = None, radius: float | None = None) -> list[Check]:
    names = list(SUITES) if name == "all" else [name]
    for n in names:
        if n not in SUITES:
            raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    out: list[Check] = []
    for n in names:
        for fn in SUITES[n]:
            kw = {}
            if grid is not None and fn in GRID_AWARE:
                kw["grid"] = grid
            if radius is not None and "radius" in fn.__code__.co_varnames[: fn.__code__.co_argcount]:
                kw["radius"] = radius
            try:
                out.extend(fn(**kw))
            except ComplexFlowError as exc:
                out.append(Check(fn.__name__, "fail", float("inf"), None, f"{type(exc).__name__}: {exc}"))
    return out
