"""Photon-mediated CNOT and Toffoli gates on quantum-dot spins in double-sided microcavities."""

from .cavity import (
    CavityParams,
    FeasibilityReport,
    InvalidParameterError,
    ScatteringCoefficients,
    coefficients,
    feasibility,
)
from .circuits import build_cnot, build_toffoli, ideal_gate_matrix, run, spin_readout
from .state import HybridState, Photon

__version__ = "0.1.0"
