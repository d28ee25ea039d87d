"""Computed-versus-printed reproduction of the worked example tables.

Every cell is recomputed from ``S(t)`` and compared with the printed
expression at the same ``t``; disagreements are flagged, never adopted.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import AdmissibilityError, ComplexFlowError
from .quantize import normalization_D
from .symplectic import ComplexSymplectic, moebius, transport_matrix

COLUMNS = ("S^-1 conj S", "S^-1 conj S . i", "T_{S^-1 conj S}", "T_{conj S}", "D_i(q,p)")
MATCH_TOL = 1e-9


@dataclass(frozen=True)
class TableRow:
    name: str
    S: Callable[[float], np.ndarray]
    printed: Callable[[float, float, float, float], dict[str, Any]]  # (t, hbar, q, p)


def _d(a, b):
    return np.diag([a, b]).astype(complex)


def _free(t):
    return np.array([[1, -1j * t], [0, 1]])


def _mult(t):
    return np.array([[1, 0], [-1j * t, 1]])


def _dil(t):
    return _d(np.exp(1j * t), np.exp(-1j * t))


def _osc(t):
    return np.array([[np.cosh(t), 1j * np.sinh(t)], [-1j * np.sinh(t), np.cosh(t)]])


ANNB1 = [
    TableRow(
        "free ev.",
        _free,
        lambda t, h, q, p: {
            "S^-1 conj S": np.array([[1, 2j * t], [0, 1]]),
            "S^-1 conj S . i": 1j * (1 + 2 * t),
            "T_{S^-1 conj S}": _d(1, (1 + 4 * t) / (1 + 2 * t)),
            "T_{conj S}": _d(1, (1 + 2 * t) / (1 + t)),
            "D_i(q,p)": np.exp(t * (1 + 3 * t) ** 2 / (1 + 2 * t) ** 2 * p * p / h),
        },
    ),
    TableRow(
        "x exp(-t x^2)",
        _mult,
        lambda t, h, q, p: {
            "S^-1 conj S": np.array([[1, 0], [2j * t, 1]]),
            "S^-1 conj S . i": 1j / (1 - 2 * t),
            "T_{S^-1 conj S}": _d((1 - 4 * t) / (1 - 2 * t), 1),
            "T_{conj S}": _d((1 - 2 * t) / (1 - t), 1),
            "D_i(q,p)": np.exp(t * (1 + 3 * t) ** 2 / (1 + 2 * t) ** 2 * q * q / h),
        },
    ),
    TableRow(
        "dilation",
        _dil,
        lambda t, h, q, p: {
            "S^-1 conj S": _d(np.exp(-2j * t), np.exp(2j * t)),
            "S^-1 conj S . i": np.exp(-4j * t) * 1j,
            "T_{S^-1 conj S}": _d((1 - 4 * t) / (1 - 2 * t), 1),
            "T_{conj S}": _d((1 - 2 * t) / (1 - t), 1),
            "D_i(q,p)": np.exp(2j * np.cos(t) * q * p / h),
        },
    ),
    TableRow(
        "oscillator",
        _osc,
        lambda t, h, q, p: {
            "S^-1 conj S": np.array([[np.cosh(2 * t), 1j * np.sinh(2 * t)], [-1j * np.sinh(2 * t), np.cosh(2 * t)]]),
            "S^-1 conj S . i": 1j,
            "T_{S^-1 conj S}": _d(np.exp(-2 * t), np.exp(2 * t)),
            "T_{conj S}": _d(np.exp(-t), np.exp(t)),
            "D_i(q,p)": np.exp(np.sinh(2 * t) * (q * q + p * p) / h),
        },
    ),
    TableRow(
        "swap",
        lambda t: np.array([[0, 1j], [1j, 0]]),
        lambda t, h, q, p: {
            "S^-1 conj S": -np.eye(2),
            "S^-1 conj S . i": 1j,
            "T_{S^-1 conj S}": -np.eye(2),
            "T_{conj S}": _d(-1, 1),
            "D_i(q,p)": 1.0,
        },
    ),
]

ANNB2 = [
    TableRow(
        "its opposite",
        lambda t: np.array([[0, 1j], [-1j, 0]]),
        lambda t, h, q, p: {
            "S^-1 conj S": np.eye(2),
            "S^-1 conj S . i": 1j,
            "T_{S^-1 conj S}": np.eye(2),
            "T_{conj S}": -np.eye(2),
        },
    ),
    TableRow(
        "anticanonical example",
        lambda t: np.array([[0, -1j], [1j, 0]]),
        lambda t, h, q, p: {
            "S^-1 conj S": -np.eye(2),
            "S^-1 conj S . i": 1j,
            "T_{S^-1 conj S}": -np.eye(2),
            "T_{conj S}": np.eye(2),
        },
    ),
]

TABLES = {"annb1": ANNB1, "annb2": ANNB2}


@dataclass
class RowResult:
    name: str
    S: np.ndarray
    computed: dict[str, Any] = field(default_factory=dict)
    printed: dict[str, Any] = field(default_factory=dict)
    match: dict[str, bool] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "S": _fmt(self.S),
            "computed": {k: _fmt(v) for k, v in self.computed.items()},
            "printed": {k: _fmt(v) for k, v in self.printed.items()},
            "match": self.match,
            "notes": self.notes,
        }


def compute_row(row: TableRow, t: float, hbar: float, z=(1.0, 1.0)) -> RowResult:
    """Recompute all columns of ``row`` at ``t``; D uses the displayed overlap order."""
    S = ComplexSymplectic(np.asarray(row.S(t), dtype=complex))
    W = S.inv() @ S.conj()
    res = RowResult(row.name, S.matrix)
    beta = moebius(W, 1j)
    if not beta.admissible:
        raise AdmissibilityError(f"{row.name}: S^-1 conj S . i = {beta.scalar} is not admissible at t = {t}")
    res.computed["S^-1 conj S"] = W.matrix
    res.computed["S^-1 conj S . i"] = beta.scalar
    res.computed["T_{S^-1 conj S}"] = transport_matrix(W, 1j).matrix
    try:
        res.computed["T_{conj S}"] = transport_matrix(S.conj(), 1j).matrix
    except ComplexFlowError as exc:
        res.computed["T_{conj S}"] = None
        res.notes.append(f"T_{{conj S}}: {exc}")
    printed = row.printed(t, hbar, float(z[0]), float(z[1]))
    if "D_i(q,p)" in printed:
        try:
            res.computed["D_i(q,p)"] = normalization_D(S, 1j, z, hbar)
        except ComplexFlowError as exc:
            res.computed["D_i(q,p)"] = None
            res.notes.append(f"D: {exc}")
    res.printed = printed
    for col, pv in printed.items():
        cv = res.computed.get(col)
        ok = cv is not None and np.allclose(np.asarray(cv, dtype=complex), np.asarray(pv, dtype=complex),
                                            rtol=MATCH_TOL, atol=MATCH_TOL)
        res.match[col] = bool(ok)
        if col == "D_i(q,p)" and not ok and cv is not None and np.isclose(abs(cv), abs(pv), rtol=1e-9):
            res.notes.append("D: moduli agree, phases differ")
    return res


def compute_table(name: str, t: float, hbar: float, z=(1.0, 1.0)) -> list[RowResult]:
    if name not in TABLES:
        raise KeyError(f"unknown table {name!r}; choose from {sorted(TABLES)}")
    return [compute_row(r, t, hbar, z) for r in TABLES[name]]


def _fmt(v) -> Any:
    if v is None:
        return None
    a = np.asarray(v, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [[[float(x.real), float(x.imag)] for x in r] for r in a]


def _show(v) -> str:
    if v is None:
        return "n/a"
    a = np.asarray(v, dtype=complex)

    def c(x):
        x = complex(x)
        if abs(x.imag) < 1e-12:
            return f"{x.real:.6g}"
        if abs(x.real) < 1e-12:
            return f"{x.imag:.6g}i"
        return f"{x.real:.6g}{x.imag:+.6g}i"

    if a.ndim == 0:
        return c(a)
    return "[" + "; ".join(" ".join(c(x) for x in r) for r in a) + "]"


def render_markdown(rows: list[RowResult]) -> str:
    cols = [c for c in COLUMNS if any(c in r.printed for r in rows)]
    head = ["row", "S"] + [f"{c} (computed / printed)" for c in cols] + ["status"]
    lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
    for r in rows:
        cells = [r.name, _show(r.S)]
        for c in cols:
            if c not in r.printed:
                cells.append("")
                continue
            flag = "MATCH" if r.match[c] else "MISMATCH"
            cells.append(f"{_show(r.computed.get(c))} / {_show(r.printed[c])} **{flag}**")
        bad = [c for c in cols if c in r.match and not r.match[c]]
        cells.append("MATCH" if not bad else "MISMATCH: " + ", ".join(bad))
        lines.append("| " + " | ".join(cells) + " |")
    for r in rows:
        for n in r.notes:
            lines.append(f"\n- {r.name}: {n}")
    return "\n".join(lines)
