"""File formats.  Every writer has a reader that reproduces the object bit-exactly.

JSON floats use Python's shortest round-trip repr; CSV floats use 17
significant digits; the operator binary stores raw little-endian doubles.
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path
from typing import Any

import numpy as np

from .coherent import CoherentLabel
from .errors import SchemaError
from .grid import GridSpec, OperatorMatrix, WaveFunction
from .metaplectic import ConventionReport
from .quantize import OffDiagSymbol
from .symbols import GaussianTerm, PhaseGrid, SymbolField
from .symplectic import ComplexSymplectic, PhasePoint, TransportMatrix, as_width

MAGIC = b"MKOP"
_HEADER = struct.Struct("<4sIIdd")


def _c(x) -> list[float]:
    x = complex(x)
    return [x.real, x.imag]


def _cmat(a) -> list:
    return [[_c(v) for v in row] for row in np.asarray(a)]


def _from_c(v) -> complex:
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise SchemaError(f"expected [re, im], got {v!r}")
    return complex(float(v[0]), float(v[1]))


def _from_cmat(rows) -> np.ndarray:
    return np.array([[_from_c(v) for v in r] for r in rows], dtype=complex)


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1) + "\n")


def _read_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: {exc}") from exc


# ComplexSymplectic --------------------------------------------------------

def symplectic_to_dict(S: ComplexSymplectic) -> dict:
    return {"n": S.n, "rows": _cmat(S.matrix)}


def symplectic_from_dict(d: dict) -> ComplexSymplectic:
    try:
        M = _from_cmat(d["rows"])
        n = int(d["n"])
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad ComplexSymplectic record: {exc}") from exc
    if M.shape != (2 * n, 2 * n):
        raise SchemaError(f"matrix shape {M.shape} does not match n = {n}")
    return ComplexSymplectic(M)


def write_symplectic(path, S: ComplexSymplectic) -> None:
    _write_json(path, symplectic_to_dict(S))


def read_symplectic(path) -> ComplexSymplectic:
    return symplectic_from_dict(_read_json(path))


# WaveFunction -------------------------------------------------------------

def write_wavefunction(path, psi: WaveFunction) -> None:
    g = psi.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if g.n == 1:
            w.writerow(["x", "re", "im"])
            for x, v in zip(g.x, psi.flat):
                w.writerow([_g17(x), _g17(v.real), _g17(v.imag)])
        else:
            w.writerow(["x", "y", "re", "im"])
            X, Y = g.mesh()
            for x, y, v in zip(X.ravel(), Y.ravel(), psi.flat):
                w.writerow([_g17(x), _g17(y), _g17(v.real), _g17(v.imag)])


def _infer_grid(x: np.ndarray, n: int, hbar: float) -> GridSpec:
    N = len(x)
    L = float(np.round((x[-1] - x[0]) * N / (2.0 * (N - 1)), 12))
    g = GridSpec(n, L, N, hbar)
    if not np.allclose(g.x, x, rtol=0, atol=1e-12 * max(1.0, L)):
        raise SchemaError("x column is not a midpoint grid")
    return g


def read_wavefunction(path, hbar: float = 0.5, grid: GridSpec | None = None) -> WaveFunction:
    """Read a wavefunction CSV; the grid is inferred from the nodes unless given."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] not in (["x", "re", "im"], ["x", "y", "re", "im"]):
        raise SchemaError(f"{path}: header must be x,re,im or x,y,re,im")
    n = len(rows[0]) - 2
    data = np.array(rows[1:], dtype=float)
    vals = data[:, n] + 1j * data[:, n + 1]
    if n == 1:
        xs = data[:, 0]
    else:
        N = int(round(np.sqrt(len(data))))
        if N * N != len(data):
            raise SchemaError("2-D wavefunction must have N^2 rows")
        xs = data[::N, 0]
    if grid is None:
        grid = _infer_grid(xs, n, hbar)
    elif grid.n != n or not np.allclose(grid.x, xs, rtol=0, atol=1e-12 * max(1.0, grid.L)):
        raise SchemaError("file nodes do not match the supplied grid")
    return WaveFunction(grid, vals)


# OperatorMatrix -----------------------------------------------------------

def write_operator(path, op: OperatorMatrix) -> None:
    g = op.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, g.n, g.N, g.L, g.hbar))
        fh.write(np.ascontiguousarray(op.entries, dtype="<c16").tobytes())


def read_operator(path) -> OperatorMatrix:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SchemaError(f"{path}: truncated header")
    magic, n, N, L, hbar = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SchemaError(f"{path}: bad magic {magic!r}")
    g = GridSpec(int(n), L, int(N), hbar)
    m = g.size
    body = raw[_HEADER.size:]
    if len(body) != 16 * m * m:
        raise SchemaError(f"{path}: expected {m}x{m} complex entries")
    return OperatorMatrix(g, np.frombuffer(body, dtype="<c16").astype(complex).reshape(m, m))


# SymbolField --------------------------------------------------------------

def symbol_to_dict(h: SymbolField) -> dict:
    if h.kind == "polynomial":
        return {"kind": "polynomial", "hbar": h.hbar, "degree": h.degree, "coeffs": h.polynomial_dict()}
    if h.kind == "gaussian":
        return {
            "kind": "gaussian",
            "hbar": h.hbar,
            "terms": [{"c": _c(t.c), "m": [_c(v) for v in t.m], "P": _cmat(t.P)} for t in h.terms],
        }
    if h.kind == "grid":
        return {
            "kind": "grid",
            "hbar": h.hbar,
            "q": [float(v) for v in h.grid.q],
            "p": [float(v) for v in h.grid.p],
            "re": h.samples.real.tolist(),
            "im": h.samples.imag.tolist(),
        }
    raise SchemaError("callable symbols cannot be serialised; sample them onto a PhaseGrid first")


def symbol_from_dict(d: dict) -> SymbolField:
    kind = d.get("kind", "polynomial" if "coeffs" in d else None)
    hbar = float(d.get("hbar", 0.5))
    if kind == "polynomial":
        h = SymbolField.polynomial(dict(d["coeffs"]), hbar)
        if "degree" in d and h.degree != int(d["degree"]):
            raise SchemaError(f"declared degree {d['degree']} but coefficients have degree {h.degree}")
        return h
    if kind == "gaussian":
        terms = tuple(
            GaussianTerm(_from_c(t["c"]), np.array([_from_c(v) for v in t["m"]]), _from_cmat(t["P"])) for t in d["terms"]
        )
        return SymbolField("gaussian", hbar, terms=terms)
    if kind == "grid":
        g = PhaseGrid(np.array(d["q"], dtype=float), np.array(d["p"], dtype=float))
        return SymbolField.from_samples(g, np.array(d["re"]) + 1j * np.array(d["im"]), hbar)
    raise SchemaError(f"unknown symbol kind {kind!r}")


def write_symbol(path, h: SymbolField) -> None:
    """Grid symbols go to ``q,p,re,im`` CSV, the other kinds to JSON."""
    if h.kind != "grid":
        _write_json(path, symbol_to_dict(h))
        return
    Q, P = h.grid.mesh()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["q", "p", "re", "im"])
        for q, p, v in zip(Q.ravel(), P.ravel(), h.samples.ravel()):
            w.writerow([_g17(q), _g17(p), _g17(v.real), _g17(v.imag)])


def read_symbol(path, hbar: float = 0.5) -> SymbolField:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return symbol_from_dict(json.loads(text))
    rows = list(csv.reader(text.splitlines()))
    if not rows or rows[0] != ["q", "p", "re", "im"]:
        raise SchemaError(f"{path}: header must be q,p,re,im")
    data = np.array(rows[1:], dtype=float)
    q = np.unique(data[:, 0])
    p = np.unique(data[:, 1])
    if len(q) * len(p) != len(data):
        raise SchemaError("symbol CSV is not a full tensor grid")
    if not (np.array_equal(data[:, 0], np.repeat(q, len(p))) and np.array_equal(data[:, 1], np.tile(p, len(q)))):
        raise SchemaError("symbol CSV rows must be ordered q-major")
    vals = (data[:, 2] + 1j * data[:, 3]).reshape(len(q), len(p))
    return SymbolField.from_samples(PhaseGrid(q, p), vals, hbar)


# CoherentLabel ------------------------------------------------------------

def label_to_dict(lab: CoherentLabel) -> dict:
    return {
        "q": [float(v) for v in lab.z.q],
        "p": [float(v) for v in lab.z.p],
        "alpha": [_c(v) for v in lab.alpha.value.ravel()],
    }


def label_from_dict(d: dict) -> CoherentLabel:
    try:
        q = np.array(d["q"], dtype=float)
        p = np.array(d["p"], dtype=float)
        a = np.array([_from_c(v) for v in d["alpha"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad CoherentLabel record: {exc}") from exc
    n = len(q)
    if a.size != n * n:
        raise SchemaError("alpha must have n^2 entries")
    return CoherentLabel(PhasePoint(q, p), as_width(a.reshape(n, n)))


def write_label(path, lab: CoherentLabel) -> None:
    _write_json(path, label_to_dict(lab))


def read_label(path) -> CoherentLabel:
    return label_from_dict(_read_json(path))


# OffDiagSymbol ------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, ComplexSymplectic):
        return symplectic_to_dict(v)
    if isinstance(v, np.ndarray):
        return _cmat(v) if v.ndim == 2 else [_c(x) for x in v.ravel()]
    if isinstance(v, complex):
        return _c(v)
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def offdiag_to_dict(sym: OffDiagSymbol) -> dict:
    md = sym.metadata
    return {
        "h": symbol_to_dict(sym.h),
        "map": sym.map.matrix.tolist(),
        "alpha_in": _c(sym.alpha_in.scalar),
        "alpha_out": _c(sym.alpha_out.scalar),
        "sign_flip": bool(sym.sign_flip),
        "normalization": sym.normalization,
        "provenance": {
            "S": _jsonable(md.get("S")),
            "variant": md.get("variant"),
            "residual": _jsonable(md.get("residual")),
        },
    }


def offdiag_from_dict(d: dict) -> OffDiagSymbol:
    try:
        prov = dict(d.get("provenance", {}))
        S = prov.get("S")
        if isinstance(S, dict):
            prov["S"] = symplectic_from_dict(S)
        return OffDiagSymbol(
            symbol_from_dict(d["h"]),
            TransportMatrix(np.array(d["map"], dtype=float)),
            _from_c(d["alpha_in"]),
            _from_c(d["alpha_out"]),
            sign_flip=bool(d.get("sign_flip", False)),
            normalization=d.get("normalization", "projector"),
            metadata={k: v for k, v in prov.items() if v is not None},
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"bad OffDiagSymbol record: {exc}") from exc


def write_offdiag(path, sym: OffDiagSymbol) -> None:
    _write_json(path, offdiag_to_dict(sym))


def read_offdiag(path) -> OffDiagSymbol:
    return offdiag_from_dict(_read_json(path))


# ConventionReport ---------------------------------------------------------

def write_convention_report(path, rep: ConventionReport) -> None:
    _write_json(path, _jsonable(rep.to_dict()))


def read_convention_report(path) -> ConventionReport:
    d = _read_json(path)
    try:
        return ConventionReport(
            cases=d["cases"],
            family_residuals=d["family_residuals"],
            meta_residuals=d.get("meta_residuals", {}),
            tolerance=float(d["tolerance"]),
            notes=d.get("notes", []),
        )
    except KeyError as exc:
        raise SchemaError(f"bad ConventionReport record: missing {exc}") from exc
