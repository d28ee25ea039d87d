"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]`` or ``[FAIL]`` line with the worst residual,
the tolerance and the runtime.  Run with ``pytest tests/test_acceptance.py -s -v``.
Tolerances and runtime budgets are fixed here rather than taken from the library.
"""
import time

import numpy as np

from complexflow import suites
from complexflow.grid import GridSpec
from complexflow.metaplectic import convention_audit
from complexflow.symplectic import ExtendedPoint, PhasePoint, as_width, flow_composition_audit
from conftest import ACCEPTANCE_LINES


def _report(number, title, pairs, elapsed, budget, extra=True):
    """``pairs`` is a list of (label, residual, tolerance)."""
    ok_res = all(r <= tol for _, r, tol in pairs) and len(pairs) > 0
    ok = ok_res and elapsed <= budget and extra
    detail = ", ".join(f"{lab} {r:.2e} (tol {tol:.0e})" for lab, r, tol in pairs)
    line = (f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}; "
            f"time {elapsed:.1f}s (budget {budget:.0f}s)")
    print("\n" + line)
    ACCEPTANCE_LINES.append(line)
    for lab, r, tol in pairs:
        assert r <= tol, f"{title}: {lab} residual {r:.3e} exceeds {tol:.0e}"
    assert pairs, title
    assert elapsed <= budget, f"{title}: {elapsed:.1f}s exceeds {budget}s"
    assert extra, title


def _run(fn, **kw):
    t0 = time.perf_counter()
    checks = fn(**kw)
    return checks, time.perf_counter() - t0


def _worst(checks, contains=""):
    res = [c.residual for c in checks if contains in c.name and c.status != "info"]
    assert res, f"no checks named {contains!r}"
    return max(res)


def test_01_coherent_normalization():
    checks, dt = _run(suites.coherent_normalization)
    _report(1, "coherent normalization", [("max |norm - 1|", _worst(checks), 1e-9)], dt, 1.0)


def test_02_overlap_oracle():
    checks, dt = _run(suites.overlap_oracle, pairs=20)
    _report(2, "overlap oracle", [("max error", _worst(checks), 1e-8)], dt, 5.0)


def test_03_real_metaplectic():
    checks, dt = _run(suites.real_metaplectic)
    _report(3, "real metaplectic unitarity and conjugation",
            [("unitarity", _worst(checks, "unitarity"), 1e-6), ("conjugation", _worst(checks, "conjugation"), 1e-5)],
            dt, 30.0)


def test_04_convention_audit():
    t0 = time.perf_counter()
    cases = [suites.free(0.1), suites.free(0.25), suites.mult(0.1), suites.mult(0.25), suites.oscillator(0.2)]
    rep = convention_audit(cases, [1j], [(0.0, 0.0), (0.5, -0.3)], GridSpec(1, 16.0, 1024, 0.5), tol=1e-6, meta=False)
    dt = time.perf_counter() - t0
    matches = [f for f, r in rep.family_residuals.items() if r <= 1e-6]
    print(f"\n  families matching: {matches}, named: {rep.best_family!r}")
    fit = max(c.get("fitted", {}).get("residual", np.inf) for c in rep.cases)
    _report(4, "convention audit", [("fit residual", fit, 1e-6)], dt, 60.0,
            extra=len(matches) == 1 and rep.best_family == matches[0])


def test_05_kernel_composition():
    checks, dt = _run(suites.kernel_composition)
    _report(5, "kernel representation up to scalar", [("worst pair", _worst(checks), 1e-5)], dt, 60.0)


def test_06_toeplitz_identity():
    checks, dt = _run(suites.toeplitz_identity, radius=8.0)
    _report(6, "Toeplitz identity", [(c.name, c.residual, 1e-3) for c in checks], dt, 120.0, extra=len(checks) == 2)


def test_07_reparametrization_equality():
    checks, dt = _run(suites.reparametrization_equality, radius=8.0)
    _report(7, "Toeplitz reparametrization (2i, i)", [("relative Frobenius", _worst(checks), 1e-3)], dt, 120.0)


def test_08_weyl_rank_one():
    checks, dt = _run(suites.weyl_closed_form)
    _report(8, "rank-one Weyl symbol closed form", [("6 pairs", _worst(checks), 1e-6)], dt, 30.0)


def test_09_weyl_pushforward():
    checks, dt = _run(suites.weyl_pushforward)
    _report(9, "Weyl push-forward for real S", [("2 S x 2 H", _worst(checks), 1e-3)], dt, 60.0)


def test_10_offdiag_reconstruction():
    checks, dt = _run(suites.offdiag_reconstruction, radius=8.0)
    pairs = [(c.name, c.residual, 1e-6 if "rotation" in c.name else 5e-2) for c in checks]
    assert sum("rotation" in c.name for c in checks) == 1 and len(checks) == 3
    _report(10, "off-diagonal reconstruction", pairs, dt, 300.0)


def test_11_projector():
    checks, dt = _run(suites.projector)
    _report(11, "single-dyad projector idempotency", [("idempotency", _worst(checks), 1e-8)], dt, 30.0)


def test_12_det_minus_one():
    checks, dt = _run(suites.det_minus_example, radius=8.0)
    _report(12, "det -1 example",
            [("parity dyads", _worst(checks, "parity"), 1e-3), ("composition law", _worst(checks, "composition law"), 5e-2)],
            dt, 180.0)


def test_13_table_reproduction():
    checks, dt = _run(suites.table_reproduction)
    _report(13, "table reproduction", [("unmatched free-row cells", _worst(checks, "free"), 0.0), ("silent cells", _worst(checks, "every cell"), 0.0)], dt, 1.0)


def test_14_flow_audit():
    t0 = time.perf_counter()
    pts = [ExtendedPoint(PhasePoint(1.0, 1.0), as_width(1j)), ExtendedPoint(PhasePoint(-0.5, 0.3), as_width(0.2 + 1.5j))]
    definitive = True
    for S in suites.complex_case_set().values():
        for S2 in suites.complex_case_set().values():
            definitive &= flow_composition_audit(S, S2, pts).definitive
    left = suites.moebius_left_action()
    dt = time.perf_counter() - t0
    _report(14, "flow audit and left action", [("left action", _worst(left), 1e-10)], dt, 1.0, extra=definitive)


def test_15_two_dimensional():
    checks, dt = _run(suites.two_dimensional)
    assert np.all([c.name.startswith("n=2") for c in checks]) and len(checks) == 4
    _report(15, "n=2 propagated Gaussian fit and width", [(c.name[4:], c.residual, 1e-2) for c in checks], dt, 600.0)
