"""Closed-form physical models: thermal dephasing, diffusion broadening, Stark fields.

Rates are ordinary frequencies in GHz with ``gamma = 1/T2``, energies are in meV,
times in ps. Every function here is pure and safe to call from any thread.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from src.python_nv_mdcs.core.constants import (
    CONSTANTS,
    GHZ_PER_PS_RATE,
    MHZ_PER_GHZ,
    V_PER_CM_PER_MV_PER_CM,
)
from src.python_nv_mdcs.core.errors import DomainError

ArrayLike = Union[float, np.ndarray]


def _require_finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class ThermalDephasingParams:
    """Parameters of the localized-phonon dephasing model."""

    gamma0: float  # GHz, zero-temperature rate
    gamma_star: float  # GHz, phonon coupling strength
    e_ph: float  # meV, phonon mode energy

    def __post_init__(self):
        _require_finite(self.gamma0, "gamma0")
        _require_finite(self.gamma_star, "gamma_star")
        _require_finite(self.e_ph, "e_ph")
        if self.gamma0 < 0:
            raise DomainError(f"gamma0 must be >= 0, got {self.gamma0}")
        if self.gamma_star < 0:
            raise DomainError(f"gamma_star must be >= 0, got {self.gamma_star}")
        if self.e_ph <= 0:
            raise DomainError(f"e_ph must be > 0, got {self.e_ph}")


@dataclass(frozen=True)
class SpectralDiffusionParams:
    """Linear growth of the effective homogeneous rate with waiting time."""

    rate: float = 0.0  # MHz per ps of waiting time

    def __post_init__(self):
        _require_finite(self.rate, "rate")
        if self.rate < 0:
            raise DomainError(f"Spectral diffusion rate must be >= 0, got {self.rate}")


@dataclass(frozen=True)
class StarkParams:
    """Transverse excited-state Stark susceptibility."""

    chi_perp: float = 1.4  # MHz/(V/cm)

    def __post_init__(self):
        _require_finite(self.chi_perp, "chi_perp")
        if self.chi_perp <= 0:
            raise DomainError(f"chi_perp must be > 0, got {self.chi_perp}")


def _as_temperatures(temp: ArrayLike) -> np.ndarray:
    temps = np.atleast_1d(np.asarray(temp, dtype=float))
    if not np.all(np.isfinite(temps)):
        raise DomainError("Temperature must be finite")
    if np.any(temps < 0):
        raise DomainError(f"Temperature must be >= 0 K, got {temps.min()}")
    return temps


def _restore_shape(values: np.ndarray, like: ArrayLike):
    if np.ndim(like) == 0:
        return float(values[0])
    return values.reshape(np.shape(like))


def bose_occupation(e_ph: float, temp: ArrayLike) -> ArrayLike:
    """Occupation 1/(exp(E/kT) - 1) of a phonon mode; exactly 0 at T = 0."""
    temps = _as_temperatures(temp)
    occupation = np.zeros_like(temps)
    warm = temps > 0
    x = e_ph / (CONSTANTS.k_b * temps[warm])
    # exp(-x)/(1-exp(-x)) never overflows as T -> 0+
    occupation[warm] = np.exp(-x) / -np.expm1(-x)
    return _restore_shape(occupation, temp)


def thermal_dephasing_rate(params: ThermalDephasingParams, temp: ArrayLike) -> ArrayLike:
    """Homogeneous rate in GHz at temperature ``temp`` (K)."""
    occupation = np.atleast_1d(bose_occupation(params.e_ph, temp))
    rates = params.gamma0 + params.gamma_star * occupation
    return _restore_shape(rates, temp)


def thermal_dephasing_jacobian(params: ThermalDephasingParams, temps: ArrayLike) -> np.ndarray:
    """Partial derivatives of the thermal rate w.r.t. (gamma0, gamma_star, e_ph).

    Returns an array of shape (len(temps), 3).
    """
    t = _as_temperatures(temps)
    occupation = np.atleast_1d(bose_occupation(params.e_ph, t))
    jac = np.zeros((t.size, 3))
    jac[:, 0] = 1.0
    jac[:, 1] = occupation
    warm = t > 0
    # dn/dx = -n(1+n), x = E/(kT)
    jac[warm, 2] = -params.gamma_star * occupation[warm] * (1.0 + occupation[warm]) / (CONSTANTS.k_b * t[warm])
    return jac


def dephasing_time(gamma: float) -> float:
    """T2 in ps for a rate in GHz."""
    gamma = _require_finite(gamma, "gamma")
    if gamma <= 0:
        raise DomainError(f"Dephasing rate must be > 0, got {gamma}")
    return 1.0 / (gamma * GHZ_PER_PS_RATE)


def energy_to_frequency(e: ArrayLike) -> ArrayLike:
    """meV to GHz."""
    values = np.asarray(e, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError("Energy must be finite")
    result = values * CONSTANTS.planck_conversion
    return float(result) if result.ndim == 0 else result


def frequency_to_energy(f: ArrayLike) -> ArrayLike:
    """GHz to meV."""
    values = np.asarray(f, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError("Frequency must be finite")
    result = values / CONSTANTS.planck_conversion
    return float(result) if result.ndim == 0 else result


def field_from_splitting(total_splitting: float, stark: StarkParams) -> float:
    """Electric field in MV/cm producing a symmetric splitting ``total_splitting`` (meV).

    Each orbital branch shifts by half the total splitting.

    :param total_splitting: separation of the two branches in meV, >= 0
    :param stark: transverse susceptibility
    :return: field in MV/cm
    """
    total_splitting = _require_finite(total_splitting, "total_splitting")
    if total_splitting < 0:
        raise DomainError(f"Splitting must be >= 0, got {total_splitting}")
    if stark.chi_perp <= 0:
        raise DomainError(f"chi_perp must be > 0, got {stark.chi_perp}")
    shift_mhz = energy_to_frequency(total_splitting / 2.0) * MHZ_PER_GHZ
    return shift_mhz / stark.chi_perp / V_PER_CM_PER_MV_PER_CM


def splitting_from_field(field: float, stark: StarkParams) -> float:
    """Total symmetric splitting in meV produced by ``field`` (MV/cm)."""
    field = _require_finite(field, "field")
    if field < 0:
        raise DomainError(f"Field must be >= 0, got {field}")
    if stark.chi_perp <= 0:
        raise DomainError(f"chi_perp must be > 0, got {stark.chi_perp}")
    shift_ghz = field * V_PER_CM_PER_MV_PER_CM * stark.chi_perp / MHZ_PER_GHZ
    return 2.0 * frequency_to_energy(shift_ghz)


def effective_gamma(gamma_intrinsic: float, diffusion: SpectralDiffusionParams, waiting: float) -> float:
    """Rate in GHz after ``waiting`` ps of linear spectral diffusion."""
    waiting = _require_finite(waiting, "waiting")
    if waiting < 0:
        raise DomainError(f"Waiting time must be >= 0, got {waiting}")
    return gamma_intrinsic + diffusion.rate * waiting / MHZ_PER_GHZ
