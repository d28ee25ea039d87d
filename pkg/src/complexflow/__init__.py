"""Metaplectic operators, coherent states and non-canonical quantization on grids."""
from .coherent import CoherentLabel, coherent_state, overlap_closed_form
from .grid import GridSpec, OperatorMatrix, WaveFunction, gaussian_fit
from .kernels import BACKEND
from .metaplectic import convention_audit, kernel_apply, kernel_build, propagator
from .quantize import offdiag_quantize, theorem1_build, toeplitz_quantize
from .symbols import PhaseGrid, SymbolField, reparametrize, wigner_numeric
from .symplectic import ComplexSymplectic, PhasePoint, WidthParameter, moebius, transport_matrix

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CoherentLabel",
    "ComplexSymplectic",
    "GridSpec",
    "OperatorMatrix",
    "PhaseGrid",
    "PhasePoint",
    "SymbolField",
    "WaveFunction",
    "WidthParameter",
    "coherent_state",
    "convention_audit",
    "gaussian_fit",
    "kernel_apply",
    "kernel_build",
    "moebius",
    "offdiag_quantize",
    "overlap_closed_form",
    "propagator",
    "reparametrize",
    "theorem1_build",
    "toeplitz_quantize",
    "transport_matrix",
    "wigner_numeric",
]
