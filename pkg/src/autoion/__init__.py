"""Photoelectron spectra of an autoionizing atom interacting with a pumped
two-level neighbour: analytic long- and finite-time spectra, their Fano,
Fano-like and dynamical zeros, and a discretized-continuum cross-check."""

__version__ = "0.1.0"

from .errors import (
    DefectiveMatrix,
    DegenerateCoupling,
    DegenerateRabi,
    NoConvergence,
    NumericalError,
    SingularDeterminant,
    StepFailure,
)
from .params import ReducedParams, RabiSpec, SystemParams, derive_reduced, figure_params, rabi, realize_couplings
from .spectra import EnergyGrid, amplitude, decompose, reduced_amplitudes, solve, total_spectrum
from .zeros import dynamical_zeros, effective_dipole, fano_zeros, sweep, weak_pump_zeros

__all__ = [
    "DefectiveMatrix",
    "DegenerateCoupling",
    "DegenerateRabi",
    "EnergyGrid",
    "NoConvergence",
    "NumericalError",
    "RabiSpec",
    "ReducedParams",
    "SingularDeterminant",
    "StepFailure",
    "SystemParams",
    "amplitude",
    "decompose",
    "derive_reduced",
    "dynamical_zeros",
    "effective_dipole",
    "fano_zeros",
    "figure_params",
    "rabi",
    "realize_couplings",
    "reduced_amplitudes",
    "solve",
    "sweep",
    "total_spectrum",
    "weak_pump_zeros",
]
