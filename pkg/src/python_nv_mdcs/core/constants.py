"""Physical constants and unit conversion factors.

All values are CODATA truncated to 7 significant digits so results are stable
across platforms. Nothing else in the package hard-codes a conversion factor.
"""

import math
from dataclasses import dataclass

from src.python_nv_mdcs.core.errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    """Constants shared by the physics, simulator and spectra modules."""

    k_b: float = 8.617333e-2  # meV/K
    planck_conversion: float = 241.7989  # GHz per meV

    def __post_init__(self):
        if self.k_b <= 0 or self.planck_conversion <= 0:
            raise DomainError("Physical constants must be positive")

    @property
    def angular_per_mev(self) -> float:
        """Angular frequency in rad/ps carried by 1 meV."""
        return 2.0 * math.pi * self.planck_conversion * 1e-3


CONSTANTS = PhysicalConstants()

# rad/ps per meV; the kernel phases and the FFT axes both go through this
ANGULAR_PER_MEV = CONSTANTS.angular_per_mev

GHZ_PER_PS_RATE = 1e-3  # 1 GHz of rate is 1e-3 per ps
MHZ_PER_GHZ = 1e3
V_PER_CM_PER_MV_PER_CM = 1e6
