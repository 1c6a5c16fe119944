"""Fourier-mode spectra of the Neumann-Poincare operator on axisymmetric surfaces.

Submodules: :mod:`specfun` (half-integer Legendre functions), :mod:`geometry`
(generating curves), :mod:`kernels` (modal kernels), :mod:`discretize` (Nystrom
assembly), :mod:`spectra` (energy-space eigenproblems), :mod:`cone` (Mellin symbol
and essential radii) and :mod:`experiments` (end-to-end scans).
"""

from .cone import essential_interval, essential_radius, mellin_symbol, symbol_trace
from .discretize import Grid, ModalOperator, AssemblyError, assemble, build_grid
from .experiments import (ExperimentConfig, run_decay_scan, run_embedded_scan,
                          run_envelope_suite, run_sphere_validation)
from .geometry import build_perturbed_curve, build_sphere_curve, check_constraints
from .kernels import modal_k, modal_s
from .specfun import DomainError, legendre_q_half, legendre_r, q_plus_r
from .spectra import (SpectrumReport, detect_discrete, eigenpair_residual, energy_spectrum,
                      sphere_eigenvalues)

__version__ = "0.1.0"

__all__ = [
    "AssemblyError", "DomainError", "ExperimentConfig", "Grid", "ModalOperator",
    "SpectrumReport", "assemble", "build_grid", "build_perturbed_curve",
    "build_sphere_curve", "check_constraints", "detect_discrete", "eigenpair_residual",
    "sphere_eigenvalues",
    "energy_spectrum", "essential_interval", "essential_radius", "legendre_q_half",
    "legendre_r", "q_plus_r", "mellin_symbol", "modal_k", "modal_s", "run_decay_scan",
    "run_embedded_scan", "run_envelope_suite", "run_sphere_validation", "symbol_trace",
]
