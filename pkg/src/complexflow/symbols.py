"""Phase-space symbols: Töplitz reparametrisation, Weyl symbols, push-forwards.

Conventions
-----------
Weyl symbol of a kernel ``K``::

    sigma(x, xi) = int K(x + y/2, x - y/2) exp(-i y xi / hbar) dy,

so ``tr K = (2 pi hbar)^{-1} int sigma``.  The Töplitz operator of ``h`` at
width ``alpha`` has Weyl symbol ``exp(D_alpha) h`` with
``D_alpha = (1/2) grad.Sigma_alpha grad`` and ``Sigma_alpha`` the phase-space
covariance of the Wigner function of ``psi^alpha_0`` (see
:func:`width_covariance`).  Twisted convolution acts on rescaled spreading
functions ``W(z) = tr(A T(sqrt2 z)^*)`` with ``T(w) = exp(i w ^ Z / hbar)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial
from typing import Any, Callable

import numpy as np
from scipy import ndimage

from .coherent import CoherentLabel, coherent_state, overlap_closed_form
from .errors import AdmissibilityError, DegenerateWidthError, GridMismatchError, SchemaError
from .grid import GridSpec, OperatorMatrix, dyad
from .symplectic import ComplexSymplectic, TransportMatrix, as_width

MAX_DEGREE = 8
DEFAULT_GAIN_CAP = 1e8


# ---------------------------------------------------------------------------
# phase-space grids


@dataclass(frozen=True)
class PhaseGrid:
    """Tensor grid with uniform ``q`` and ``p`` axes."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        for ax in (self.q, self.p):
            d = np.diff(ax)
            if ax.ndim != 1 or len(ax) < 2 or not np.allclose(d, d[0], rtol=1e-10, atol=0):
                raise ValueError("phase-grid axes must be uniform 1-D arrays")

    @classmethod
    def midpoint(cls, R: float = 8.0, M: int = 256) -> "PhaseGrid":
        ax = -R + (np.arange(M) + 0.5) * (2 * R / M)
        return cls(ax, ax.copy())

    @classmethod
    def centred(cls, R: float, M: int) -> "PhaseGrid":
        """Odd-sized lattice containing the origin, closed under ``z - z'`` where in range."""
        if M % 2 == 0:
            raise ValueError("centred lattices need an odd number of nodes")
        ax = np.linspace(-R, R, M)
        return cls(ax, ax.copy())

    @property
    def dq(self) -> float:
        return float(self.q[1] - self.q[0])

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    @property
    def cell(self) -> float:
        return self.dq * self.dp

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.q), len(self.p))

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.q, self.p, indexing="ij")

    def __eq__(self, other):
        return (
            isinstance(other, PhaseGrid)
            and self.shape == other.shape
            and np.array_equal(self.q, other.q)
            and np.array_equal(self.p, other.p)
        )

    def __hash__(self):
        return hash((self.shape, self.q[0], self.p[0], self.dq, self.dp))


# ---------------------------------------------------------------------------
# polynomial helpers (coefficient array C[a, b] of q^a p^b)


def _poly_eval(C: np.ndarray, q, p):
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    out = np.zeros(np.broadcast(q, p).shape, dtype=complex)
    for a, b in zip(*np.nonzero(C)):
        out = out + C[a, b] * q**a * p**b
    return out


def _poly_dq(C):
    out = np.zeros_like(C)
    a = np.arange(1, C.shape[0])
    out[:-1, :] = C[1:, :] * a[:, None]
    return out


def _poly_dp(C):
    out = np.zeros_like(C)
    b = np.arange(1, C.shape[1])
    out[:, :-1] = C[:, 1:] * b[None, :]
    return out


def _poly_heat(C: np.ndarray, G: np.ndarray) -> np.ndarray:
    """``exp((1/2) grad.G grad) C``; the series terminates at degree / 2."""
    def step(X):
        return 0.5 * (G[0, 0] * _poly_dq(_poly_dq(X)) + 2 * G[0, 1] * _poly_dq(_poly_dp(X)) + G[1, 1] * _poly_dp(_poly_dp(X)))

    out = C.astype(complex).copy()
    term = C.astype(complex)
    for k in range(1, MAX_DEGREE // 2 + 2):
        term = step(term)
        if not np.any(term):
            break
        out = out + term / factorial(k)
    return out


def _poly_linear(C: np.ndarray, L: np.ndarray) -> np.ndarray:
    """Coefficients of ``h(L z)`` for real 2x2 ``L``."""
    size = C.shape[0]
    # powers of the linear forms q' = L00 q + L01 p and p' = L10 q + L11 p
    def power(l0, l1, k):
        P = np.zeros((size, size), dtype=complex)
        P[0, 0] = 1.0
        for _ in range(k):
            Q = np.zeros_like(P)
            Q[1:, :] += l0 * P[:-1, :]
            Q[:, 1:] += l1 * P[:, :-1]
            P = Q
        return P

    out = np.zeros((size, size), dtype=complex)
    for a, b in zip(*np.nonzero(C)):
        pa = power(L[0, 0], L[0, 1], a)
        pb = power(L[1, 0], L[1, 1], b)
        prod = np.zeros_like(out)
        for i, j in zip(*np.nonzero(pa)):
            prod[i:, j:] += pa[i, j] * pb[: size - i, : size - j]
        out += C[a, b] * prod
    return out


def _parse_monomial(key: str) -> tuple[int, int]:
    """``"q^a p^b"``, ``"q^2"``, ``"q*p"`` or ``"1"`` to exponents ``(a, b)``."""
    body = key.replace(" ", "").replace("*", "")
    if body in ("", "1"):
        return 0, 0
    parts = re.findall(r"([qp])(?:\^(\d+))?", body)
    if "".join(v + (f"^{k}" if k else "") for v, k in parts) != body:
        raise SchemaError(f"cannot parse monomial {key!r}")
    a = sum(int(k or 1) for v, k in parts if v == "q")
    b = sum(int(k or 1) for v, k in parts if v == "p")
    return a, b


def _monomial_key(a: int, b: int) -> str:
    return f"q^{a} p^{b}"


# ---------------------------------------------------------------------------
# symbol fields


@dataclass(frozen=True)
class GaussianTerm:
    """``c exp(-(1/2)(z - m).P(z - m))`` with complex symmetric ``P``."""

    c: complex
    m: np.ndarray
    P: np.ndarray

    def __call__(self, q, p):
        dq = np.asarray(q) - self.m[0]
        dp = np.asarray(p) - self.m[1]
        quad = self.P[0, 0] * dq * dq + 2 * self.P[0, 1] * dq * dp + self.P[1, 1] * dp * dp
        return self.c * np.exp(-0.5 * quad)


@dataclass(frozen=True)
class SymbolField:
    """A function on phase space in one of four representations.

    ``polynomial``
        dense coefficients ``coeffs[a, b]`` of ``q^a p^b``, total degree <= 8;
    ``grid``
        samples on a :class:`PhaseGrid` (cubic interpolation between nodes);
    ``gaussian``
        a finite sum of :class:`GaussianTerm`, closed under reparametrisation
        and linear push-forward;
    ``function``
        a vectorised callable ``f(q, p)``, used for weights built from other
        symbols (evaluation and push-forward only).
    """

    kind: str
    hbar: float
    coeffs: np.ndarray | None = None
    grid: PhaseGrid | None = None
    samples: np.ndarray | None = None
    terms: tuple[GaussianTerm, ...] = ()
    func: Callable | None = None
    metadata: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind == "polynomial":
            C = np.zeros((MAX_DEGREE + 1, MAX_DEGREE + 1), dtype=complex)
            src = np.asarray(self.coeffs, dtype=complex)
            if src.shape[0] > MAX_DEGREE + 1 or src.shape[1] > MAX_DEGREE + 1:
                nz = np.argwhere(src)
                if nz.size and nz.sum(axis=1).max() > MAX_DEGREE:
                    raise ValueError(f"polynomial degree exceeds {MAX_DEGREE}")
                src = src[: MAX_DEGREE + 1, : MAX_DEGREE + 1]
            C[: src.shape[0], : src.shape[1]] = src
            a, b = np.nonzero(C)
            if a.size and (a + b).max() > MAX_DEGREE:
                raise ValueError(f"polynomial degree exceeds {MAX_DEGREE}")
            object.__setattr__(self, "coeffs", C)
        elif self.kind == "grid":
            s = np.asarray(self.samples, dtype=complex)
            if self.grid is None or s.shape != self.grid.shape:
                raise ValueError("grid samples do not match the phase grid")
            if not np.all(np.isfinite(s)):
                raise ValueError("symbol samples must be finite")
            object.__setattr__(self, "samples", s)
        elif self.kind == "gaussian":
            object.__setattr__(self, "terms", tuple(self.terms))
        elif self.kind == "function":
            if not callable(self.func):
                raise ValueError("function symbols need a callable")
        else:
            raise ValueError(f"unknown symbol representation {self.kind!r}")

    # constructors ---------------------------------------------------------
    @classmethod
    def polynomial(cls, coeffs, hbar: float = 0.5) -> "SymbolField":
        """From an array ``C[a, b]`` or a mapping ``{"q^a p^b": value}`` / ``{(a, b): value}``."""
        if isinstance(coeffs, dict):
            C = np.zeros((MAX_DEGREE + 1, MAX_DEGREE + 1), dtype=complex)
            for k, v in coeffs.items():
                a, b = _parse_monomial(k) if isinstance(k, str) else k
                if a + b > MAX_DEGREE:
                    raise ValueError(f"polynomial degree exceeds {MAX_DEGREE}")
                if isinstance(v, (list, tuple)):
                    v = complex(v[0], v[1])
                C[a, b] += v
            coeffs = C
        return cls("polynomial", hbar, coeffs=coeffs)

    @classmethod
    def constant(cls, c: complex = 1.0, hbar: float = 0.5) -> "SymbolField":
        return cls.polynomial({(0, 0): c}, hbar)

    @classmethod
    def gaussian(cls, c=1.0, m=(0.0, 0.0), P=((1.0, 0.0), (0.0, 1.0)), hbar: float = 0.5) -> "SymbolField":
        return cls("gaussian", hbar, terms=(GaussianTerm(complex(c), np.asarray(m, dtype=complex), np.asarray(P, dtype=complex)),))

    @classmethod
    def from_callable(cls, f: Callable, hbar: float = 0.5, **metadata) -> "SymbolField":
        return cls("function", hbar, func=f, metadata=dict(metadata))

    @classmethod
    def from_samples(cls, grid: PhaseGrid, samples, hbar: float = 0.5, **metadata) -> "SymbolField":
        return cls("grid", hbar, grid=grid, samples=samples, metadata=dict(metadata))

    @classmethod
    def from_function(cls, f: Callable, grid: PhaseGrid, hbar: float = 0.5) -> "SymbolField":
        Q, P = grid.mesh()
        return cls.from_samples(grid, f(Q, P), hbar)

    # evaluation -----------------------------------------------------------
    @property
    def degree(self) -> int | None:
        if self.kind != "polynomial":
            return None
        a, b = np.nonzero(self.coeffs)
        return int((a + b).max()) if a.size else 0

    def __call__(self, q, p) -> np.ndarray:
        if self.kind == "polynomial":
            return _poly_eval(self.coeffs, q, p)
        if self.kind == "gaussian":
            q = np.asarray(q, dtype=float)
            out = np.zeros(np.broadcast(q, np.asarray(p)).shape, dtype=complex)
            for t in self.terms:
                out = out + t(q, p)
            return out
        if self.kind == "function":
            q, p = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(p, dtype=float))
            return np.asarray(self.func(q, p), dtype=complex)
        g = self.grid
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        q, p = np.broadcast_arrays(q, p)
        shape = q.shape
        coords = np.stack([(q.ravel() - g.q[0]) / g.dq, (p.ravel() - g.p[0]) / g.dp])
        re = ndimage.map_coordinates(self.samples.real, coords, order=3, mode="constant", cval=0.0)
        im = ndimage.map_coordinates(self.samples.imag, coords, order=3, mode="constant", cval=0.0)
        return (re + 1j * im).reshape(shape)

    def on(self, grid: PhaseGrid) -> "SymbolField":
        Q, P = grid.mesh()
        return SymbolField.from_samples(grid, self(Q, P), self.hbar, **self.metadata)

    def scaled(self, c: complex) -> "SymbolField":
        if self.kind == "polynomial":
            return SymbolField("polynomial", self.hbar, coeffs=self.coeffs * c, metadata=self.metadata)
        if self.kind == "gaussian":
            return SymbolField("gaussian", self.hbar, terms=tuple(GaussianTerm(t.c * c, t.m, t.P) for t in self.terms))
        if self.kind == "function":
            f = self.func
            return SymbolField.from_callable(lambda q, p: c * f(q, p), self.hbar, **self.metadata)
        return SymbolField.from_samples(self.grid, self.samples * c, self.hbar, **self.metadata)

    def polynomial_dict(self) -> dict[str, list[float]]:
        if self.kind != "polynomial":
            raise ValueError("not a polynomial symbol")
        return {
            _monomial_key(a, b): [float(self.coeffs[a, b].real), float(self.coeffs[a, b].imag)]
            for a, b in zip(*np.nonzero(self.coeffs))
        }


# ---------------------------------------------------------------------------
# Töplitz reparametrisation


def width_covariance(alpha, hbar: float) -> np.ndarray:
    """Phase-space covariance of the Wigner function of ``psi^alpha_0`` (n = 1).

    Writing ``i / alpha = A + iB``, it equals
    ``(hbar/2) [[1/A, -B/A], [-B/A, A + B^2/A]]``.
    """
    a = as_width(alpha).scalar
    w = 1j / a
    A, B = w.real, w.imag
    return 0.5 * hbar * np.array([[1 / A, -B / A], [-B / A, A + B * B / A]])


def _gaussian_heat(t: GaussianTerm, G: np.ndarray) -> GaussianTerm:
    Pinv = np.linalg.inv(t.P)
    Pn = np.linalg.inv(Pinv + G)
    Pn = 0.5 * (Pn + Pn.T)
    if np.min(np.linalg.eigvalsh(Pn.real)) <= 0:
        raise DegenerateWidthError("Gaussian symbol does not stay decaying under this reparametrisation")
    ev = np.linalg.eigvals(np.eye(2) + G @ t.P).astype(complex)
    amp = 1.0 / np.prod(np.sqrt(ev))
    return GaussianTerm(t.c * amp, t.m, Pn)


def heat_flow(h: SymbolField, G: np.ndarray, gain_cap: float = DEFAULT_GAIN_CAP) -> SymbolField:
    """Apply ``exp((1/2) grad.G grad)`` for a real symmetric 2x2 ``G``."""
    G = np.asarray(G, dtype=float)
    if h.kind == "polynomial":
        return SymbolField("polynomial", h.hbar, coeffs=_poly_heat(h.coeffs, G))
    if h.kind == "gaussian":
        return SymbolField("gaussian", h.hbar, terms=tuple(_gaussian_heat(t, G) for t in h.terms))
    if h.kind == "function":
        if np.allclose(G, 0):
            return h
        raise ValueError("function symbols cannot be reparametrised; sample them on a grid first")
    g = h.grid
    Mq, Mp = g.shape
    wq = 2 * np.pi * np.fft.fftfreq(Mq, d=g.dq)
    wp = 2 * np.pi * np.fft.fftfreq(Mp, d=g.dp)
    WQ, WP = np.meshgrid(wq, wp, indexing="ij")
    expo = -0.5 * (G[0, 0] * WQ**2 + 2 * G[0, 1] * WQ * WP + G[1, 1] * WP**2)
    with np.errstate(over="ignore"):
        mult = np.exp(expo)
    capped = ~(mult <= gain_cap)
    mult[capped] = 0.0
    out = np.fft.ifft2(np.fft.fft2(h.samples) * mult)
    meta = dict(h.metadata)
    meta["capped_modes"] = int(capped.sum())
    return SymbolField.from_samples(g, out, h.hbar, **meta)


def reparametrize(
    h: SymbolField, alpha_from, alpha_to, gain_cap: float = DEFAULT_GAIN_CAP
) -> SymbolField:
    """Symbol at width ``alpha_to`` giving the same Töplitz operator as ``h`` at ``alpha_from``.

    Both sides share the Weyl symbol, so the map is
    ``exp((1/2) grad.(Sigma_from - Sigma_to) grad)``.  Polynomials and
    Gaussians are transformed exactly.  On grids the multiplier grows along
    the direction where ``Sigma_to`` exceeds ``Sigma_from``; modes beyond
    ``gain_cap`` are dropped and counted in ``metadata["capped_modes"]``.
    """
    S_from = width_covariance(alpha_from, h.hbar)
    S_to = width_covariance(alpha_to, h.hbar)
    G = S_from - S_to
    if h.kind == "grid" and np.max(np.linalg.eigvalsh(G)) < 0 and np.linalg.norm(G) > 0:
        # the multiplier would grow in every direction: nothing of the symbol survives
        raise AdmissibilityError("decay condition violated: target width dominates in every direction")
    return heat_flow(h, G, gain_cap)


def toeplitz_to_weyl(h: SymbolField, alpha) -> SymbolField:
    """Weyl symbol of the Töplitz operator of ``h`` at width ``alpha``."""
    return heat_flow(h, width_covariance(alpha, h.hbar))


# ---------------------------------------------------------------------------
# Weyl symbols of coherent dyads


def _norm_const(alpha: complex, hbar: float) -> float:
    return (alpha.imag / (np.pi * hbar * abs(alpha) ** 2)) ** 0.25


def weyl_rank_one_exact(a: CoherentLabel, b: CoherentLabel, x, xi, hbar: float) -> np.ndarray:
    """Weyl symbol of ``|psi_a><psi_b|`` by completing the square in ``y``.

    With ``beta = i/alpha_a``, ``beta' = i/alpha_b`` the integrand is
    ``exp(-A y^2 + B y + C)`` with ``A = (beta + conj beta')/(8 hbar)``.
    """
    al, alp = a.alpha.scalar, b.alpha.scalar
    q, p = a.z.q[0], a.z.p[0]
    qp, pp = b.z.q[0], b.z.p[0]
    be, bep = 1j / al, np.conj(1j / alp)
    A = (be + bep) / (8 * hbar)
    if abs(A) == 0 or A.real <= 0:
        raise DegenerateWidthError("degenerate width combination beta + conj(beta')")
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    B = (-be * (x - q) + bep * (x - qp) + 1j * (p + pp - 2 * xi)) / (2 * hbar)
    C = (
        -be * (x - q) ** 2 / (2 * hbar)
        - bep * (x - qp) ** 2 / (2 * hbar)
        + 1j * (p - pp) * x / hbar
        - 0.5j * (p * q - pp * qp) / hbar
    )
    pref = _norm_const(al, hbar) * _norm_const(alp, hbar) * np.sqrt(np.pi / A)
    return pref * np.exp(B * B / (4 * A) + C)


def weyl_rank_one_printed(a: CoherentLabel, b: CoherentLabel, x, xi, hbar: float, repaired: bool = False):
    """The reference closed form, as stated or with its repairs applied.

    Repairs: ``beta = i/alpha`` instead of ``i alpha``; ``(p - p')x`` divided by
    ``hbar``; the label phase ``exp(-i(pq - p'q')/2hbar)`` restored.
    """
    al, alp = a.alpha.scalar, b.alpha.scalar
    q, p = a.z.q[0], a.z.p[0]
    qp, pp = b.z.q[0], b.z.p[0]
    if repaired:
        be, bep = 1j / al, 1j / alp
    else:
        be, bep = 1j * al, 1j * alp
    bb = np.conj(bep)
    s = be + bb
    if abs(s) == 0:
        raise DegenerateWidthError("degenerate width combination beta + conj(beta')")
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    pref = np.sqrt(2 * np.sqrt(complex(be.real * bep.real)) / s) / hbar
    e1 = np.exp(-be * bb / (2 * s * hbar) * (q + qp - 2 * x) ** 2)
    e2 = np.exp(-((p + pp - 2 * xi) ** 2) / (2 * s * hbar))
    lin = (p - pp) * x / hbar if repaired else (p - pp) * x
    e3 = np.exp(1j * (lin - (p + pp - 2 * xi) * (be * (x - q) - bb * (x - qp)) / (s * hbar)))
    out = pref * e1 * e2 * e3
    if repaired:
        out = out * np.exp(-0.5j * (p * q - pp * qp) / hbar)
    return out


def weyl_diagonal_printed(label: CoherentLabel, x, xi, hbar: float):
    """The reference diagonal specialisation ``(1/pi hbar) e^{-i(q-x)^2/alpha hbar} e^{i alpha (p-xi)^2/hbar}``."""
    al = label.alpha.scalar
    q, p = label.z.q[0], label.z.p[0]
    return np.exp(-1j / al * (q - x) ** 2 / hbar) * np.exp(1j * al * (p - xi) ** 2 / hbar) / (np.pi * hbar)


WEYL_VARIANTS = ("exact", "printed", "repaired")


def _weyl_eval(variant, a, b, x, xi, hbar):
    if variant == "exact":
        return weyl_rank_one_exact(a, b, x, xi, hbar)
    if variant in ("printed", "repaired"):
        return weyl_rank_one_printed(a, b, x, xi, hbar, repaired=variant == "repaired")
    raise ValueError(f"unknown variant {variant!r}")


@lru_cache(maxsize=16)
def weyl_calibration(variant: str, hbar: float) -> complex:
    """Ratio ``wigner_numeric / variant`` at the origin for ``|psi^i_0><psi^i_0|``.

    Computed once per ``(variant, hbar)`` on a 512-node grid.
    """
    L = max(12.0, 8 * np.sqrt(hbar))
    g = GridSpec(1, L, 512, hbar)
    lab = CoherentLabel.of(0.0, 0.0, 1j)
    psi = coherent_state(lab, g)
    W = wigner_numeric(dyad(psi, psi))
    i0 = np.argmin(np.abs(W.grid.q))
    j0 = np.argmin(np.abs(W.grid.p))
    ref = W.samples[i0, j0]
    val = _weyl_eval(variant, lab, lab, W.grid.q[i0], W.grid.p[j0], hbar)
    return complex(ref / val)


def weyl_rank_one(
    a: CoherentLabel, b: CoherentLabel, grid: PhaseGrid, hbar: float = 0.5, variant: str = "repaired"
) -> SymbolField:
    """Weyl symbol of ``|psi_a><psi_b|`` on ``grid`` from a closed form.

    ``variant`` selects the exact derivation, the reference formula as stated,
    or the repaired reference formula.  The result is multiplied by the single
    calibration constant of :func:`weyl_calibration`, stored in
    ``metadata["calibration"]``.
    """
    if a.n != 1 or b.n != 1:
        raise ValueError("weyl_rank_one is one-dimensional")
    cal = weyl_calibration(variant, float(hbar))
    X, XI = grid.mesh()
    vals = _weyl_eval(variant, a, b, X, XI, hbar) * cal
    return SymbolField.from_samples(grid, vals, hbar, calibration=cal, variant=variant)


def _half_shift(K: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Band-limited ``K(x + dx/2, y + dx/2)``."""
    N = grid.N
    freqs = np.fft.fftfreq(N)
    ph = np.exp(2j * np.pi * freqs * 0.5)
    # unit Nyquist phase keeps S S^T = I, so diagonal kernels stay diagonal
    ph[N // 2] = 1.0
    out = np.fft.ifft(np.fft.fft(K, axis=0) * ph[:, None], axis=0)
    out = np.fft.ifft(np.fft.fft(out, axis=1) * ph[None, :], axis=1)
    return out


def wigner_numeric(M: OperatorMatrix) -> SymbolField:
    """Weyl symbol of a 1-D kernel by FFT over the separation variable.

    Separations ``y_m = m dx`` use grid nodes for even ``m`` and the
    half-node shifted kernel for odd ``m``.  Output axes: the spatial nodes
    and ``xi_k = (k - N/2) pi hbar / (2L)``, ``k < N``.
    """
    g = M.grid
    if g.n != 1:
        raise ValueError("wigner_numeric is one-dimensional")
    N = g.N
    K = M.entries
    Ks = _half_shift(K, g)
    i = np.arange(N)[:, None]
    m = np.arange(-N, N)[None, :]
    j = np.floor_divide(m, 2)
    even = (m % 2) == 0
    r = i + j
    c = np.where(even, i - j, i - j - 1)
    valid = (r >= 0) & (r < N) & (c >= 0) & (c < N)
    rr = np.clip(r, 0, N - 1)
    cc = np.clip(c, 0, N - 1)
    Gm = np.where(even, K[rr, cc], Ks[rr, cc])
    Gm = np.where(valid, Gm, 0.0)
    # sum_m G[i, m] exp(-i m dx xi_k / hbar), xi_k = (k - N) dxi on a 2N lattice
    dxi = np.pi * g.hbar / (2 * g.L)
    mm = np.arange(-N, N)
    Gs = Gm * np.exp(1j * np.pi * mm)[None, :]  # shifts the frequency origin to the centre
    spec = np.fft.fft(np.fft.ifftshift(Gs, axes=1), axis=1)
    k = np.arange(2 * N)
    xi_all = (k - N) * dxi
    keep = slice(N // 2, N // 2 + N)
    samples = spec[:, keep] * g.dx
    return SymbolField.from_samples(PhaseGrid(g.x.copy(), xi_all[keep]), samples, g.hbar)


# ---------------------------------------------------------------------------
# push-forward


def pushforward(h: SymbolField, T: TransportMatrix, jacobian_mode: str = "without") -> SymbolField:
    """``h o T^{-1}``, times ``|det T|^{-1}`` when ``jacobian_mode == "with"``."""
    if jacobian_mode not in ("with", "without"):
        raise ValueError("jacobian_mode must be 'with' or 'without'")
    M = np.asarray(T.matrix if isinstance(T, TransportMatrix) else T, dtype=float)
    det = np.linalg.det(M)
    if abs(det) < 1e-14:
        raise DegenerateWidthError("singular transport matrix")
    Minv = np.linalg.inv(M)
    jac = 1.0 / abs(det) if jacobian_mode == "with" else 1.0
    if h.kind == "polynomial":
        return SymbolField("polynomial", h.hbar, coeffs=_poly_linear(h.coeffs, Minv) * jac)
    if h.kind == "gaussian":
        terms = []
        for t in h.terms:
            # (M^{-1}z - m).P(M^{-1}z - m) = (z - Mm).M^{-T} P M^{-1}(z - Mm)
            terms.append(GaussianTerm(t.c * jac, M @ t.m, Minv.T @ t.P @ Minv))
        return SymbolField("gaussian", h.hbar, terms=tuple(terms))
    if h.kind == "function":
        f = h.func

        def pushed(q, p):
            return f(Minv[0, 0] * q + Minv[0, 1] * p, Minv[1, 0] * q + Minv[1, 1] * p) * jac

        return SymbolField.from_callable(pushed, h.hbar, **h.metadata)
    Q, P = h.grid.mesh()
    src = np.einsum("ij,jkl->ikl", Minv, np.stack([Q, P]))
    return SymbolField.from_samples(h.grid, h(src[0], src[1]) * jac, h.hbar, **h.metadata)


def integrate(h: SymbolField, grid: PhaseGrid | None = None) -> complex:
    """``int h dq dp`` (exact for Gaussians, midpoint rule otherwise)."""
    if h.kind == "gaussian":
        tot = 0j
        for t in h.terms:
            ev = np.linalg.eigvals(t.P).astype(complex)
            tot += t.c * 2 * np.pi / np.prod(np.sqrt(ev))
        return complex(tot)
    if h.kind == "grid" and grid is None:
        return complex(h.samples.sum() * h.grid.cell)
    if grid is None:
        raise ValueError("a phase grid is required to integrate this symbol")
    Q, P = grid.mesh()
    return complex(h(Q, P).sum() * grid.cell)


# ---------------------------------------------------------------------------
# spreading functions and twisted convolution


def _wedge(q1, p1, q2, p2):
    return p1 * q2 - q1 * p2


def ambiguity_rank_one(a: CoherentLabel, b: CoherentLabel, grid: PhaseGrid, hbar: float) -> SymbolField:
    """Rescaled spreading function ``W(z) = tr(|a><b| T(sqrt2 z)^*)``.

    ``T(-w) psi_a = exp(-(i/2hbar) w ^ z_a) psi_{z_a - w}``, so
    ``W(z) = exp(-(i/2hbar) w ^ z_a) <psi_b | psi_{z_a - w}>`` with ``w = sqrt2 z``.
    """
    Q, P = grid.mesh()
    wq, wp = np.sqrt(2) * Q, np.sqrt(2) * P
    za = a.z.vector
    out = np.empty(Q.shape, dtype=complex)
    for idx in np.ndindex(Q.shape):
        shifted = CoherentLabel.of(za[0] - wq[idx], za[1] - wp[idx], a.alpha)
        out[idx] = np.exp(-0.5j * _wedge(wq[idx], wp[idx], za[0], za[1]) / hbar) * overlap_closed_form(b, shifted, hbar)
    return SymbolField.from_samples(grid, out, hbar, representation="spreading")


def twisted_convolution(W1: SymbolField, W2: SymbolField, sign: int = 1) -> SymbolField:
    """``(1/pi hbar) sum_z' W1(z - z') W2(z') exp(sign i z ^ z' / hbar) dz'``.

    Both inputs must live on the same centred lattice (odd node count, origin
    included); ``W1(z - z')`` outside the lattice counts as zero.  With
    ``sign = +1`` this is the product law of rescaled spreading functions;
    ``sign = -1`` is the law after a determinant -1 push-forward.
    """
    from . import kernels

    if W1.kind != "grid" or W2.kind != "grid":
        raise ValueError("twisted convolution needs grid symbols")
    if W1.grid != W2.grid:
        raise GridMismatchError("twisted convolution of symbols on different grids")
    g = W1.grid
    Mq, Mp = g.shape
    if Mq % 2 == 0 or Mp % 2 == 0 or abs(g.q[Mq // 2]) > 1e-12 * g.dq or abs(g.p[Mp // 2]) > 1e-12 * g.dp:
        raise ValueError("twisted convolution needs a centred lattice")
    hbar = W1.hbar
    out = kernels.twisted_convolution(
        np.ascontiguousarray(W1.samples), np.ascontiguousarray(W2.samples), g.dq, g.dp, hbar, int(sign)
    )
    return SymbolField.from_samples(g, out * g.cell / (np.pi * hbar), hbar, representation="spreading")


# ---------------------------------------------------------------------------
# Weyl covariance under real metaplectic conjugation


def weyl_pushforward_check(
    H: OperatorMatrix,
    S: ComplexSymplectic,
    interior: float | None = None,
    gain_cap: float = DEFAULT_GAIN_CAP,
    point_map: str = "sigma S sigma",
) -> float:
    """Max interior ``|sigma_{U^-1 H U}(z) - sigma_H(M z)|``, relative to ``max |sigma_H|``.

    ``point_map`` is ``"S^-1"`` or ``"sigma S sigma"``; the two agree when
    ``S[0, 0] == S[1, 1]``.  ``interior`` bounds ``|q|`` and ``|p|`` of the
    compared nodes (default ``L / 3``).
    """
    from .metaplectic import kernel_build

    if not S.is_real:
        raise ValueError("the Weyl push-forward identity is stated for real S")
    g = H.grid
    U = kernel_build(S, g, gain_cap=gain_cap).matrix
    Uinv = kernel_build(S.inv(), g, gain_cap=gain_cap).matrix
    conj = Uinv @ H @ U
    c = _projective_scalar(Uinv @ U)
    conj = conj * (1.0 / c)
    lhs = wigner_numeric(conj)
    rhs_src = wigner_numeric(H)
    Q, P = lhs.grid.mesh()
    if point_map == "S^-1":
        Sinv = np.real(S.inv().matrix)
    elif point_map == "sigma S sigma":
        Sinv = np.real(S.momentum_flipped().matrix)
    else:
        raise ValueError(f"unknown point map {point_map!r}")
    sq = Sinv[0, 0] * Q + Sinv[0, 1] * P
    sp = Sinv[1, 0] * Q + Sinv[1, 1] * P
    R = interior if interior is not None else g.L / 3
    mask = (np.abs(Q) <= R) & (np.abs(P) <= R) & (np.abs(sq) <= R) & (np.abs(sp) <= R)
    rhs = rhs_src(sq[mask], sp[mask])
    scale = np.abs(rhs_src.samples).max()
    return float(np.abs(lhs.samples[mask] - rhs).max() / scale)


def _projective_scalar(M: OperatorMatrix) -> complex:
    """Scalar ``c`` with ``M ~ c I`` measured on the centred ground state."""
    from .grid import operator_apply, inner_product

    g = M.grid
    psi = coherent_state(CoherentLabel(np.zeros(2 * g.n), 1j * np.eye(g.n) if g.n > 1 else 1j), g)
    return inner_product(psi, operator_apply(M, psi))
