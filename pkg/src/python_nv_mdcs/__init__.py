"""Python NV MDCS - simulation and analysis of multidimensional coherent spectra of NV-center ensembles."""

__version__ = "0.1.0"

from src.python_nv_mdcs.core.physics import (
    SpectralDiffusionParams,
    StarkParams,
    ThermalDephasingParams,
    field_from_splitting,
    thermal_dephasing_rate,
)
from src.python_nv_mdcs.core.simulator import EnsembleModel, Resonance, ScanGrid, simulate_scan
from src.python_nv_mdcs.core.spectra import default_grid, one_quantum_spectrum

__all__ = [
    "EnsembleModel",
    "Resonance",
    "ScanGrid",
    "SpectralDiffusionParams",
    "StarkParams",
    "ThermalDephasingParams",
    "default_grid",
    "field_from_splitting",
    "one_quantum_spectrum",
    "simulate_scan",
    "thermal_dephasing_rate",
]
