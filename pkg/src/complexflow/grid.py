"""Discretised Hilbert space on uniform midpoint grids in one or two dimensions.

Nodes are ``x_k = -L + (k + 1/2) 2L/N``, symmetric about the origin, so the
parity operator is an exact permutation of samples.  The Fourier lattice is
the midpoint lattice of spacing ``pi hbar / L``; the discrete transform
between the two is exactly unitary.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import FitError, GridMismatchError
from .symplectic import PhasePoint, WidthParameter


@dataclass(frozen=True)
class GridSpec:
    n: int = 1
    L: float = 20.0
    N: int = 2048
    hbar: float = 0.5

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError("grids exist in dimension 1 and 2 only")
        if self.N < 16 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two >= 16")
        if not (self.L > 0 and self.hbar > 0):
            raise ValueError("L and hbar must be positive")

    @classmethod
    def default(cls, n: int = 1) -> "GridSpec":
        if n == 1:
            return cls(1, 20.0, 2048, 0.5)
        return cls(2, 8.0, 64, 1.0)

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> float:
        return np.pi * self.hbar / self.L

    @property
    def weight(self) -> float:
        return self.dx**self.n

    @cached_property
    def x(self) -> np.ndarray:
        return -self.L + (np.arange(self.N) + 0.5) * self.dx

    @cached_property
    def xi(self) -> np.ndarray:
        return (np.arange(self.N) - self.N / 2 + 0.5) * self.dxi

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N**self.n

    def mesh(self) -> tuple[np.ndarray, ...]:
        if self.n == 1:
            return (self.x,)
        return tuple(np.meshgrid(self.x, self.x, indexing="ij"))

    def dual(self) -> "GridSpec":
        """Grid whose nodes are this grid's Fourier lattice."""
        return GridSpec(self.n, np.pi * self.hbar * self.N / (2.0 * self.L), self.N, self.hbar)

    def interior_mask(self, margin: float | None = None) -> np.ndarray:
        """Flat boolean mask of nodes with every coordinate inside ``L - margin``."""
        if margin is None:
            margin = 4.0 * np.sqrt(self.hbar)
        inside = np.abs(self.x) <= self.L - margin
        if self.n == 1:
            return inside
        return np.logical_and.outer(inside, inside).ravel()


def _same_grid(a: GridSpec, b: GridSpec):
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


@dataclass(frozen=True)
class WaveFunction:
    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex).reshape(self.grid.shape)
        if not np.all(np.isfinite(s)):
            raise ValueError("wavefunction samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def flat(self) -> np.ndarray:
        return self.samples.ravel()

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))

    def __add__(self, other):
        _same_grid(self.grid, other.grid)
        return WaveFunction(self.grid, self.samples + other.samples)

    def __mul__(self, c):
        return WaveFunction(self.grid, self.samples * c)

    __rmul__ = __mul__


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator stored as kernel values ``K(x_i, x_j)``."""

    grid: GridSpec
    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries)
        if e.dtype != complex:
            e = e.astype(complex)
        m = self.grid.size
        if e.shape != (m, m):
            raise ValueError(f"operator shape {e.shape} does not match grid size {m}")
        object.__setattr__(self, "entries", e)

    @classmethod
    def from_matrix(cls, grid: GridSpec, matrix: np.ndarray) -> "OperatorMatrix":
        """Wrap a matrix acting on sample vectors (kernel = matrix / dx^n)."""
        return cls(grid, np.asarray(matrix) / grid.weight)

    @property
    def matrix(self) -> np.ndarray:
        """Matrix acting on sample vectors."""
        return self.entries * self.grid.weight

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _same_grid(self.grid, other.grid)
        return OperatorMatrix(self.grid, (self.entries @ other.entries) * self.grid.weight)

    def __add__(self, other):
        _same_grid(self.grid, other.grid)
        return OperatorMatrix(self.grid, self.entries + other.entries)

    def __sub__(self, other):
        _same_grid(self.grid, other.grid)
        return OperatorMatrix(self.grid, self.entries - other.entries)

    def __mul__(self, c):
        return OperatorMatrix(self.grid, self.entries * c)

    __rmul__ = __mul__

    def trace(self) -> complex:
        return complex(np.trace(self.entries) * self.grid.weight)


def identity_operator(grid: GridSpec) -> OperatorMatrix:
    return OperatorMatrix(grid, np.eye(grid.size) / grid.weight)


def dyad(ket: WaveFunction, bra: WaveFunction) -> OperatorMatrix:
    """``|ket><bra|`` as a kernel."""
    _same_grid(ket.grid, bra.grid)
    return OperatorMatrix(ket.grid, np.outer(ket.flat, bra.flat.conj()))


def inner_product(bra: WaveFunction, ket: WaveFunction) -> complex:
    """``<bra|ket>`` by midpoint quadrature, conjugate-linear in ``bra``."""
    _same_grid(bra.grid, ket.grid)
    return complex(np.dot(bra.flat.conj(), ket.flat) * bra.grid.weight)


def parity_apply(psi: WaveFunction) -> WaveFunction:
    s = psi.samples
    for ax in range(psi.grid.n):
        s = np.flip(s, axis=ax)
    return WaveFunction(psi.grid, s)


def _centered_dft(values: np.ndarray, axis: int, sign: int) -> np.ndarray:
    """``sum_j exp(sign 2 pi i (j-c)(k-c)/N) v_j`` with ``c = N/2 - 1/2``."""
    N = values.shape[axis]
    c = N / 2 - 0.5
    j = np.arange(N)
    shape = [1] * values.ndim
    shape[axis] = N
    pre = np.exp(-sign * 2j * np.pi * c * j / N).reshape(shape)
    post = (np.exp(-sign * 2j * np.pi * c * j / N) * np.exp(sign * 2j * np.pi * c * c / N)).reshape(shape)
    if sign < 0:
        out = np.fft.fft(values * pre, axis=axis)
    else:
        out = np.fft.ifft(values * pre, axis=axis) * N
    return out * post


def fourier_transform(psi: WaveFunction, direction: str = "forward") -> WaveFunction:
    """Unitary transform with kernel ``exp(-i x xi / hbar) / (2 pi hbar)^{n/2}``.

    The result lives on ``psi.grid.dual()``; ``inverse`` uses the conjugate
    kernel and maps back.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError("direction must be 'forward' or 'inverse'")
    g = psi.grid
    sign = -1 if direction == "forward" else 1
    out = psi.samples
    for ax in range(g.n):
        out = _centered_dft(out, ax, sign)
    out = out * (g.dx / np.sqrt(2 * np.pi * g.hbar)) ** g.n
    return WaveFunction(g.dual(), out)


def fourier_matrix(grid: GridSpec, direction: str = "forward") -> np.ndarray:
    """Dense 1-D matrix of :func:`fourier_transform` acting on sample vectors."""
    if grid.n != 1:
        raise ValueError("fourier_matrix is one-dimensional")
    sign = -1 if direction == "forward" else 1
    c = grid.N / 2 - 0.5
    j = np.arange(grid.N) - c
    return np.exp(sign * 2j * np.pi * np.outer(j, j) / grid.N) * grid.dx / np.sqrt(2 * np.pi * grid.hbar)


def operator_apply(M: OperatorMatrix, psi: WaveFunction) -> WaveFunction:
    _same_grid(M.grid, psi.grid)
    return WaveFunction(psi.grid, (M.entries @ psi.flat) * psi.grid.weight)


def position_operator(grid: GridSpec, axis: int = 0) -> OperatorMatrix:
    coord = grid.mesh()[axis].ravel()
    return OperatorMatrix.from_matrix(grid, np.diag(coord).astype(complex))


def momentum_operator(grid: GridSpec) -> OperatorMatrix:
    """``-i hbar d/dx`` as a spectral (band-limited) dense matrix, 1-D."""
    F = fourier_matrix(grid, "forward")
    Finv = fourier_matrix(grid.dual(), "inverse")
    return OperatorMatrix.from_matrix(grid, Finv @ (grid.xi[:, None] * F))


# ---------------------------------------------------------------------------
# Gaussian fit


@dataclass(frozen=True)
class GaussianFit:
    beta: WidthParameter
    z: PhasePoint
    lam: complex
    residual: float

    def as_tuple(self):
        return self.beta, self.z, self.lam, self.residual


def _quadratic_basis(grid: GridSpec, mask=None):
    if grid.n == 1:
        x = grid.x
        cols = [np.ones_like(x), x, x * x]
    else:
        X, Y = (m.ravel() for m in grid.mesh())
        cols = [np.ones_like(X), X, Y, X * X, X * Y, Y * Y]
    B = np.stack(cols, axis=1).astype(complex)
    return B if mask is None else B[mask]


def _coeffs_to_labels(c: np.ndarray, n: int, hbar: float):
    """Map log-quadratic coefficients to (beta, centre, log-prefactor)."""
    if n == 1:
        quad = np.array([[c[2]]])
        lin = np.array([c[1]])
    else:
        quad = np.array([[c[3], c[4] / 2], [c[4] / 2, c[5]]])
        lin = np.array([c[1], c[2]])
    # exponent -(i / 2 hbar) (x-q) beta^{-1} (x-q) + i p.x / hbar + ...
    beta_inv = 2j * hbar * quad
    beta = np.linalg.inv(beta_inv)
    beta = 0.5 * (beta + beta.T)
    w = -1j * hbar * beta @ lin
    im = beta.imag
    p = np.linalg.solve(im, w.imag)
    q = w.real - beta.real @ p
    return beta, q, p


def gaussian_fit(psi: WaveFunction, refine: bool = True) -> GaussianFit:
    """Fit ``psi ~ lam * psi^beta_z`` by log-quadratic regression.

    The log of the samples is unwrapped along the support (where
    ``|psi| > 1e-6 max|psi|``), regressed on a quadratic basis with weights
    ``|psi|``, then polished by one Gauss-Newton step on the full grid.
    """
    from .coherent import CoherentLabel, coherent_state  # local: coherent depends on grid

    g = psi.grid
    flat = psi.flat
    amp = np.abs(flat)
    if amp.max() == 0:
        raise FitError("insufficient support", {"reason": "zero wavefunction"})
    mask = amp > 1e-6 * amp.max()
    if mask.sum() < 32:
        raise FitError("insufficient support", {"nodes": int(mask.sum())})

    logs = np.log(flat[mask])
    if g.n == 1:
        idx = np.flatnonzero(mask)
        if np.any(np.diff(idx) != 1):
            raise FitError("fit failed", {"reason": "support is not connected"})
        logs = logs.real + 1j * np.unwrap(logs.imag)
    else:
        ph = np.full(g.shape, np.nan)
        ph.ravel()[mask] = logs.imag
        ph2 = _unwrap2d(ph, mask.reshape(g.shape))
        logs = logs.real + 1j * ph2.ravel()[mask]
    B = _quadratic_basis(g, mask)
    wts = amp[mask] / amp.max()
    coef, *_ = np.linalg.lstsq(B * wts[:, None], logs * wts, rcond=None)

    Bfull = _quadratic_basis(g)
    if refine:
        model = np.exp(Bfull @ coef)
        J = Bfull * model[:, None]
        delta, *_ = np.linalg.lstsq(J, flat - model, rcond=None)
        coef = coef + delta
    try:
        beta_m, q, p = _coeffs_to_labels(coef, g.n, g.hbar)
        beta = WidthParameter(beta_m[0, 0] if g.n == 1 else beta_m)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise FitError("fit failed", {"coefficients": coef.tolist(), "error": str(exc)}) from exc
    z = PhasePoint(q, p)
    ref = coherent_state(CoherentLabel(z, beta), g)
    lam = inner_product(ref, psi)
    resid = np.linalg.norm(flat - lam * ref.flat) / np.linalg.norm(flat)
    if not np.isfinite(resid):
        raise FitError("fit failed", {"coefficients": coef.tolist()})
    return GaussianFit(beta, z, lam, float(resid))


def _unwrap2d(phase: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Unwrap a 2-D phase on a convex support: first the centre row, then columns."""
    out = phase.copy()
    rows = np.flatnonzero(mask.any(axis=1))
    r0 = rows[len(rows) // 2]
    cols = np.flatnonzero(mask[r0])
    out[r0, cols] = np.unwrap(phase[r0, cols])
    for c in range(phase.shape[1]):
        idx = np.flatnonzero(mask[:, c])
        if idx.size == 0:
            continue
        col = phase[idx, c]
        if mask[r0, c]:
            anchor = np.searchsorted(idx, r0)
            unwrapped = np.unwrap(col)
            unwrapped += out[r0, c] - unwrapped[anchor]
        else:
            unwrapped = np.unwrap(col)
        out[idx, c] = unwrapped
    return out


def momentum_apply(psi: WaveFunction, axis: int = 0) -> WaveFunction:
    """``-i hbar d/dx_axis`` applied spectrally."""
    g = psi.grid
    f = fourier_transform(psi)
    shape = [1] * g.n
    shape[axis] = g.N
    xi = g.xi.reshape(shape)
    return fourier_transform(WaveFunction(f.grid, f.samples * xi), "inverse")


def position_apply(psi: WaveFunction, axis: int = 0) -> WaveFunction:
    return WaveFunction(psi.grid, psi.samples * psi.grid.mesh()[axis])
