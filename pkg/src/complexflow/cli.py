"""Command-line interface.

Exit codes: 0 when every pass/fail check passes, 1 when any fails, 2 on usage
or input-schema errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import io, kernels, suites
from .coherent import CoherentLabel, coherent_state
from .errors import AdmissibilityError, ComplexFlowError, SchemaError
from .grid import GridSpec, gaussian_fit, inner_product, operator_apply
from .metaplectic import FAMILIES, convention_audit, family_prediction, propagator, realized_propagate
from .quantize import toeplitz_quantize
from .report import Check, RunReport, check, info
from .symbols import integrate, wigner_numeric
from .symplectic import ExtendedPoint, PhasePoint, as_width, flow_composition_audit, kernel_transport
from .tables import compute_table, render_markdown


class UsageError(Exception):
    pass


def _complex(s: str) -> complex:
    try:
        return complex(s.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {s!r}") from exc


def _vector(s: str) -> list[float]:
    try:
        return [float(v) for v in s.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from exc


def _grid(args, n: int | None = None) -> GridSpec:
    n = n or args.n
    d = GridSpec.default(n)
    return GridSpec(n, args.grid_L or d.L, args.grid_N or d.N, args.hbar or d.hbar)


def _grid_override(args) -> GridSpec | None:
    if args.grid_L is None and args.grid_N is None and args.hbar is None and args.n == 1:
        return None
    return _grid(args)


def _out(args, default: str) -> Path:
    p = Path(args.out or default)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(report: RunReport, args) -> int:
    if args.json:
        print(json.dumps(report.to_dict(), indent=1))
    else:
        print(report.to_text())
    return 0 if report.ok else 1


def _environment(args, grid: GridSpec | None) -> dict:
    env = {"backend": kernels.BACKEND}
    if grid is not None:
        env.update(n=grid.n, L=grid.L, N=grid.N, hbar=grid.hbar)
    return env


# commands -----------------------------------------------------------------

def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in suites.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}")
    grid = _grid_override(args)
    t0 = time.perf_counter()
    checks = suites.run_suite(args.suite, grid, args.radius)
    rep = RunReport(f"verify --suite {args.suite}", checks, _environment(args, grid), time.perf_counter() - t0)
    return _emit(rep, args)


def cmd_table(args) -> int:
    hbar = args.hbar or 0.5
    try:
        rows = compute_table(args.name, args.t, hbar)
    except AdmissibilityError as exc:
        raise UsageError(f"inadmissible t: {exc}") from exc
    if args.json:
        print(json.dumps({"table": args.name, "t": args.t, "hbar": hbar, "rows": [r.to_dict() for r in rows]}, indent=1))
    else:
        print(render_markdown(rows))
    if args.out:
        _out(args, "").write_text(render_markdown(rows) + "\n")
    return 0


def cmd_propagate(args) -> int:
    S = io.read_symplectic(args.S_file)
    grid = _grid(args, S.n)
    n = S.n
    z = args.z if args.z is not None else [0.0] * (2 * n)
    if len(z) != 2 * n:
        raise UsageError(f"--z needs {2 * n} entries")
    alpha = args.alpha * np.eye(n) if n > 1 else args.alpha
    label = CoherentLabel(PhasePoint.from_vector(z), as_width(alpha))
    t0 = time.perf_counter()
    U, chart = propagator(S, grid)
    psi = U(coherent_state(label, grid))
    fit = gaussian_fit(psi)
    out = _out(args, "propagated.csv")
    io.write_wavefunction(out, psi)
    io.write_label(out.with_suffix(".fit.json"), CoherentLabel(fit.z, fit.beta))
    checks: list[Check] = [check("gaussian fit residual", fit.residual, 1e-6, f"chart={chart}")]
    comparison = {"fitted": {"beta": io._cmat(fit.beta.value), "z": fit.z.vector.tolist()}, "families": {}}
    for name in FAMILIES:
        try:
            beta, w = family_prediction(name, S, label.alpha, z)
            r = float(max(np.abs(beta.value - fit.beta.value).max(), np.abs(w - fit.z.vector).max()))
        except ComplexFlowError:
            r = float("inf")
        comparison["families"][name] = r
        checks.append(info(f"family '{name}'", r))
    best = min(comparison["families"], key=comparison["families"].get)
    comparison["winning_convention"] = best
    try:
        _, lam = realized_propagate(S, label, grid.hbar, chart)
        checks.append(info("scalar ratio |fitted / predicted - 1|", abs(fit.lam / lam - 1.0)))
    except ComplexFlowError as exc:
        checks.append(info("scalar prediction unavailable", float("nan"), str(exc)))
    out.with_suffix(".comparison.json").write_text(json.dumps(comparison, indent=1) + "\n")
    checks.append(info(f"winning convention: {best}", comparison["families"][best], f"wrote {out}"))
    rep = RunReport("propagate", checks, _environment(args, grid), time.perf_counter() - t0)
    return _emit(rep, args)


def cmd_quantize(args) -> int:
    grid = _grid(args, 1)
    h = io.read_symbol(args.symbol_file, grid.hbar)
    radius = args.radius or min(8.0, grid.L / 2)
    t0 = time.perf_counter()
    H = toeplitz_quantize(h, args.alpha, grid, radius)
    out = _out(args, "operator.mkop")
    io.write_operator(out, H)
    checks = []
    for q, p in ((0.0, 0.0), (1.0, 0.0), (0.0, -1.0), (1.0, 1.0)):
        psi = coherent_state(CoherentLabel.of(q, p, args.alpha), grid)
        ev = inner_product(psi, operator_apply(H, psi))
        checks.append(info(f"<psi_({q:g},{p:g})|H psi> = {ev.real:.6g}{ev.imag:+.6g}i", abs(ev)))
    checks.append(info(f"wrote {out}", 0.0))
    rep = RunReport("quantize", checks, _environment(args, grid), time.perf_counter() - t0)
    return _emit(rep, args)


def cmd_wigner(args) -> int:
    t0 = time.perf_counter()
    M = io.read_operator(args.operator_file)
    W = wigner_numeric(M)
    out = _out(args, "wigner.csv")
    io.write_symbol(out, W)
    tr = M.trace()
    total = integrate(W) / (2 * np.pi * M.grid.hbar)
    checks = [
        info(f"trace = {tr.real:.6g}{tr.imag:+.6g}i", abs(tr)),
        info("|integral / (2 pi hbar) - trace|", abs(total - tr), f"wrote {out}"),
    ]
    rep = RunReport("wigner", checks, _environment(args, M.grid), time.perf_counter() - t0)
    return _emit(rep, args)


def cmd_audit(args) -> int:
    grid = _grid(args, 1) if _grid_override(args) else GridSpec(1, 16.0, 1024, 0.5)
    t0 = time.perf_counter()
    cases = suites.complex_case_set()
    zs = [args.z] if args.z else [[0.0, 0.0], [0.5, -0.3]]
    rep = convention_audit(cases.values(), [args.alpha], zs, grid, tol=1e-6)
    if args.out:
        io.write_convention_report(_out(args, ""), rep)
    checks = [info(f"family '{k}'", v) for k, v in rep.family_residuals.items()]
    checks += [info(f"arrangement '{k}'", v) for k, v in rep.meta_residuals.items()]
    checks.append(info(f"best family: {rep.best_family or 'unresolved'}", min(rep.family_residuals.values())))
    run = RunReport("audit", checks, _environment(args, grid), time.perf_counter() - t0)
    return _emit(run, args)


def cmd_flow(args) -> int:
    if args.S_files:
        if len(args.S_files) != 2:
            raise UsageError("flow takes two S files (or none for the standard pairs)")
        pairs = {"S S2": tuple(io.read_symplectic(f) for f in args.S_files)}
    else:
        pairs = {
            "free ev. 0.1, x exp(-t x^2) 0.1": (suites.free(0.1), suites.mult(0.1)),
            "oscillator 0.2, free ev. 0.05": (suites.oscillator(0.2), suites.free(0.05)),
            "free ev. 0.1, free ev. 0.1": (suites.free(0.1), suites.free(0.1)),
        }
    z = args.z or [0.5, -0.3]
    samples = [ExtendedPoint(PhasePoint.from_vector(z), as_width(args.alpha))]
    t0 = time.perf_counter()
    checks = []
    reports = {}
    for name, (S, S2) in pairs.items():
        rep = flow_composition_audit(S, S2, samples)
        krep = flow_composition_audit(S, S2, samples, transport=kernel_transport)
        reports[name] = {"defining": rep.to_dict(), "kernel": krep.to_dict()}
        for k, v in rep.residuals.items():
            checks.append(info(f"{name}: {k}", v))
        checks.append(check(f"{name}: report definitive", 0.0 if rep.definitive else 1.0, 0.0,
                            f"matching={rep.matching}"))
        checks.append(info(f"{name}: kernel transport Phi_S o Phi_S2", krep.residuals["Phi_S o Phi_S2"]))
    if args.out:
        _out(args, "").write_text(json.dumps(reports, indent=1) + "\n")
    run = RunReport("flow", checks, {"backend": kernels.BACKEND}, time.perf_counter() - t0)
    return _emit(run, args)


# parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=1, choices=(1, 2), help="phase-space half dimension")
    common.add_argument("--grid-N", type=int, default=None, help="nodes per axis (power of two)")
    common.add_argument("--grid-L", type=float, default=None, help="half-width of the position box")
    common.add_argument("--hbar", type=float, default=None)
    common.add_argument("--radius", type=float, default=None, help="phase-space quadrature radius")
    common.add_argument("--json", action="store_true", help="print a JSON report")
    common.add_argument("--out", default=None, help="output file")
    common.add_argument("--threads", type=int, default=None, help="cap on kernel worker threads")

    p = argparse.ArgumentParser(prog="complexflow", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite", default="core", help="core | metaplectic | weyl | offdiag | ndim | all")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("table", parents=[common], help="reproduce an example table")
    t.add_argument("name", choices=("annb1", "annb2"))
    t.add_argument("--t", type=float, default=0.25)
    t.set_defaults(func=cmd_table)

    pr = sub.add_parser("propagate", parents=[common], help="propagate a coherent state by U(S)")
    pr.add_argument("S_file")
    pr.add_argument("--alpha", type=_complex, default=1j)
    pr.add_argument("--z", type=_vector, default=None)
    pr.set_defaults(func=cmd_propagate)

    q = sub.add_parser("quantize", parents=[common], help="Toeplitz-quantize a symbol file")
    q.add_argument("symbol_file")
    q.add_argument("--alpha", type=_complex, default=1j)
    q.set_defaults(func=cmd_quantize)

    w = sub.add_parser("wigner", parents=[common], help="Weyl symbol of an operator file")
    w.add_argument("operator_file")
    w.set_defaults(func=cmd_wigner)

    a = sub.add_parser("audit", parents=[common], help="convention audit on the complex case set")
    a.add_argument("--alpha", type=_complex, default=1j)
    a.add_argument("--z", type=_vector, default=None)
    a.set_defaults(func=cmd_audit)

    f = sub.add_parser("flow", parents=[common], help="flow composition audit")
    f.add_argument("S_files", nargs="*")
    f.add_argument("--alpha", type=_complex, default=1j)
    f.add_argument("--z", type=_vector, default=None)
    f.set_defaults(func=cmd_flow)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        kernels.set_num_threads(args.threads)
    try:
        return args.func(args)
    except (UsageError, SchemaError, FileNotFoundError, ValueError) as exc:
        print(f"complexflow {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except ComplexFlowError as exc:
        print(f"complexflow {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
