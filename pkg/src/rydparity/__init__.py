"""Simulation of a parity-controlled three-atom Rydberg gate.

Submodules: :mod:`hilbert` (basis), :mod:`model` (Hamiltonian), :mod:`dynamics`
(RK4 Schrödinger/Lindblad), :mod:`gates` (ideal unitaries), :mod:`effective`
(reduced model and spectra), :mod:`noise` (quasi-static ensembles),
:mod:`optimize` (Nelder-Mead), :mod:`codes` (syndrome extraction) and
:mod:`cli`.
"""

__version__ = "0.1.0"

from . import codes, dynamics, effective, gates, hilbert, model, noise, optimize  # noqa: E402
from .dynamics import DecayModel, TimeGrid, evolve_lindblad, evolve_schrodinger  # noqa: E402
from .gates import PE_X, PO_SQRT_X, RotationSpec, parity_gate  # noqa: E402
from .kernels import backend_name  # noqa: E402
from .model import NoiseDraw, SystemConfig, TargetPulse, hamiltonian_terms, mhz  # noqa: E402
from .noise import NoiseSpec, ensemble_average  # noqa: E402

__all__ = [
    "codes", "dynamics", "effective", "gates", "hilbert", "model", "noise", "optimize",
    "DecayModel", "TimeGrid", "evolve_lindblad", "evolve_schrodinger",
    "PE_X", "PO_SQRT_X", "RotationSpec", "parity_gate", "backend_name",
    "NoiseDraw", "SystemConfig", "TargetPulse", "hamiltonian_terms", "mhz",
    "NoiseSpec", "ensemble_average",
]
