"""Design, simulation and measurement budgeting for detecting ground-state
virtual photons in an ultrastrongly coupled superconducting circuit."""

__version__ = "0.1.0"

from .atom import AASpectrum, BasisConfig, solve_aa  # noqa: E402
from .circuit import CircuitDesign, PhysicalCircuit, hamiltonian_scales, to_physical  # noqa: E402
from .design import SweepGrid, invert_design, sweep  # noqa: E402
from .dynamics import DriveProtocol, calibrate_protocol, evolve, sweep_T  # noqa: E402
from .eqr import EQRModel, LabeledEigensystem, build_eqr, diagonalize_and_label  # noqa: E402
from .errors import VPDetectError  # noqa: E402
from .measurement import measurement_budget, thermal_stats  # noqa: E402
from .merit import analyze_design, simple_criterion, stokes_amplitudes  # noqa: E402

__all__ = [
    "AASpectrum", "BasisConfig", "solve_aa", "CircuitDesign", "PhysicalCircuit", "hamiltonian_scales",
    "to_physical", "SweepGrid", "invert_design", "sweep", "DriveProtocol", "calibrate_protocol", "evolve",
    "sweep_T", "EQRModel", "LabeledEigensystem", "build_eqr", "diagonalize_and_label", "VPDetectError",
    "measurement_budget", "thermal_stats", "analyze_design", "simple_criterion", "stokes_amplitudes",
]
