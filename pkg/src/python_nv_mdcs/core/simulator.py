"""Forward model of the rephasing third-order response of an inhomogeneous ensemble."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from src.python_nv_mdcs.core.constants import ANGULAR_PER_MEV, GHZ_PER_PS_RATE
from src.python_nv_mdcs.core.errors import DomainError, GridError
from src.python_nv_mdcs.core.physics import (
    SpectralDiffusionParams,
    ThermalDephasingParams,
    effective_gamma,
    thermal_dephasing_rate,
)

logger = logging.getLogger(__name__)

MIN_SAMPLES_PER_AXIS = 8
UNIFORMITY_RTOL = 1e-9
UNDERFLOW = 1e-300


@dataclass(frozen=True)
class Resonance:
    """One Gaussian distribution of transition energies."""

    center: float  # meV
    sigma: float = 0.0  # meV
    weight: float = 1.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.center, self.sigma, self.weight)):
            raise DomainError(f"Resonance fields must be finite: {self}")
        if self.sigma < 0:
            raise DomainError(f"Inhomogeneous width must be >= 0, got {self.sigma}")
        if self.weight < 0:
            raise DomainError(f"Resonance weight must be >= 0, got {self.weight}")


@dataclass(frozen=True)
class EchoSegments:
    """Two-stage echo decay: early and late T2 joined continuously at ``crossover``."""

    t2_early: float  # ps
    t2_late: float  # ps
    crossover: float  # ps

    def __post_init__(self):
        if self.t2_early <= 0 or self.t2_late <= 0:
            raise DomainError("Segment dephasing times must be > 0")
        if self.crossover <= 0:
            raise DomainError(f"Crossover must be > 0, got {self.crossover}")


@dataclass(frozen=True)
class EnsembleModel:
    """Physical description of the ensemble excited by the photon echo."""

    components: Tuple[Resonance, ...]
    gamma: float = 0.0  # GHz, used when no thermal model is given
    thermal: Optional[ThermalDephasingParams] = None
    temperature: Optional[float] = None  # K
    diffusion: SpectralDiffusionParams = field(default_factory=SpectralDiffusionParams)
    pop_decay: float = 0.0  # GHz
    echo_segments: Optional[EchoSegments] = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise DomainError("An ensemble needs at least one component")
        if sum(c.weight for c in self.components) <= 0:
            raise DomainError("Component weights must not all be zero")
        if not math.isfinite(self.gamma) or self.gamma < 0:
            raise DomainError(f"Homogeneous rate must be finite and >= 0, got {self.gamma}")
        if not math.isfinite(self.pop_decay) or self.pop_decay < 0:
            raise DomainError(f"Population decay must be finite and >= 0, got {self.pop_decay}")
        if self.thermal is not None and self.temperature is None:
            raise DomainError("A thermal dephasing model needs a temperature")

    @property
    def weights(self) -> np.ndarray:
        raw = np.array([c.weight for c in self.components], dtype=float)
        return raw / raw.sum()

    @property
    def mean_center(self) -> float:
        centers = np.array([c.center for c in self.components], dtype=float)
        return float(np.dot(self.weights, centers))

    def homogeneous_rate(self, temperature: Optional[float] = None) -> float:
        """Rate in GHz before spectral diffusion."""
        if self.thermal is None:
            return self.gamma
        temp = self.temperature if temperature is None else temperature
        return float(thermal_dephasing_rate(self.thermal, temp))


@dataclass(frozen=True)
class ScanGrid:
    """Uniform delay grid of a photon-echo scan at fixed waiting time."""

    tau: np.ndarray  # ps
    t: np.ndarray  # ps
    waiting: float = 0.0  # ps
    carrier: Optional[float] = None  # meV, rotating-frame energy

    def __post_init__(self):
        object.__setattr__(self, "tau", np.asarray(self.tau, dtype=float))
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        for name, axis in (("tau", self.tau), ("t", self.t)):
            _check_axis(axis, name)
        if not math.isfinite(self.waiting) or self.waiting < 0:
            raise GridError(f"Waiting time must be finite and >= 0, got {self.waiting}")
        if self.carrier is not None and not math.isfinite(self.carrier):
            raise GridError("Carrier energy must be finite")

    @classmethod
    def uniform(
        cls, n_tau: int = 256, n_t: int = 256, step: float = 0.05, waiting: float = 0.0, carrier: Optional[float] = None
    ) -> "ScanGrid":
        return cls(
            tau=step * np.arange(n_tau, dtype=float),
            t=step * np.arange(n_t, dtype=float),
            waiting=waiting,
            carrier=carrier,
        )

    @property
    def shape(self) -> Tuple[int, int]:
        return self.tau.size, self.t.size

    @property
    def tau_step(self) -> float:
        return float(self.tau[1] - self.tau[0])

    @property
    def t_step(self) -> float:
        return float(self.t[1] - self.t[0])

    def with_carrier(self, carrier: float) -> "ScanGrid":
        return ScanGrid(tau=self.tau, t=self.t, waiting=self.waiting, carrier=carrier)


def _check_axis(axis: np.ndarray, name: str) -> None:
    if axis.ndim != 1 or axis.size < MIN_SAMPLES_PER_AXIS:
        raise GridError(f"Axis {name} needs at least {MIN_SAMPLES_PER_AXIS} samples")
    if not np.all(np.isfinite(axis)):
        raise GridError(f"Axis {name} contains non-finite values")
    if axis[0] < 0:
        raise GridError(f"Axis {name} must be non-negative")
    steps = np.diff(axis)
    if np.any(steps <= 0):
        raise GridError(f"Axis {name} must be strictly increasing")
    if not np.allclose(steps, steps[0], rtol=UNIFORMITY_RTOL, atol=0.0):
        raise GridError(f"Axis {name} must be uniformly spaced")


@dataclass(frozen=True)
class TimeDomainScan:
    """Complex rephasing signal sampled on a (tau, t) grid."""

    grid: ScanGrid
    values: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, "values", values)
        if values.shape != self.grid.shape:
            raise GridError(f"Scan values have shape {values.shape}, grid expects {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise GridError("Scan values must be finite")
        if self.grid.carrier is None:
            raise GridError("A scan needs a carrier energy to place its spectrum axes")

    @property
    def carrier(self) -> float:
        return float(self.grid.carrier)


def _kernel(
    model: EnsembleModel, tau: np.ndarray, t: np.ndarray, waiting: float, carrier: float, gamma: float
) -> np.ndarray:
    """Rephasing response on broadcastable ``tau`` and ``t`` arrays."""
    difference = tau - t
    total = np.zeros(np.broadcast(tau, t).shape, dtype=complex)
    # fixed summation order over components keeps results bit-stable
    for weight, component in zip(model.weights, model.components):
        omega = ANGULAR_PER_MEV * (component.center - carrier)
        sigma_angular = ANGULAR_PER_MEV * component.sigma
        total += weight * np.exp(1j * omega * difference - 0.5 * (sigma_angular * difference) ** 2)
    rate = effective_gamma(gamma, model.diffusion, waiting) * GHZ_PER_PS_RATE
    population = math.exp(-model.pop_decay * GHZ_PER_PS_RATE * waiting)
    return total * (np.exp(-rate * (tau + t)) * population)


def _check_delays(*delays: float) -> None:
    for delay in delays:
        if not math.isfinite(delay) or delay < 0:
            raise DomainError(f"Delays must be finite and >= 0, got {delay}")


def rephasing_response(model: EnsembleModel, tau: float, waiting: float, t: float, carrier: float = 0.0) -> complex:
    """Complex rephasing amplitude at a single (tau, T, t) point.

    With ``carrier = 0`` phases are evaluated at absolute transition energies.
    """
    _check_delays(tau, waiting, t)
    gamma = model.homogeneous_rate()
    value = _kernel(model, np.asarray(float(tau)), np.asarray(float(t)), waiting, carrier, gamma)
    return complex(value)


def gamma_for_conditions(model: EnsembleModel, temperature: float, waiting: float) -> float:
    """Effective rate in GHz at ``temperature`` (K) after ``waiting`` (ps)."""
    return effective_gamma(model.homogeneous_rate(temperature), model.diffusion, waiting)


def simulate_scan(model: EnsembleModel, grid: ScanGrid) -> TimeDomainScan:
    """Evaluate the rephasing response over the full (tau, t) grid at the grid's waiting time.

    :param model: ensemble to simulate
    :param grid: delay grid; its carrier defaults to the weight-averaged center
    :return: scan with the resolved carrier and the model settings in its metadata
    """
    carrier = model.mean_center if grid.carrier is None else grid.carrier
    grid = grid.with_carrier(carrier)
    gamma = model.homogeneous_rate()
    values = _kernel(model, grid.tau[:, np.newaxis], grid.t[np.newaxis, :], grid.waiting, carrier, gamma)
    values[np.abs(values) < UNDERFLOW] = 0.0
    logger.debug("Simulated %dx%d scan, gamma=%.6g GHz, carrier=%.6g meV", *grid.shape, gamma, carrier)
    metadata = {
        "n_components": len(model.components),
        "gamma_ghz": gamma,
        "diffusion_mhz_per_ps": model.diffusion.rate,
        "pop_decay_ghz": model.pop_decay,
    }
    return TimeDomainScan(grid=grid, values=values, metadata=metadata)


def echo_envelope(model: EnsembleModel, tau: np.ndarray, waiting: float = 0.0) -> np.ndarray:
    """Field decay of the echo with tau: exp(-2 gamma tau), or the segmented form."""
    tau = np.asarray(tau, dtype=float)
    segments = model.echo_segments
    if segments is None:
        rate = effective_gamma(model.homogeneous_rate(), model.diffusion, waiting) * GHZ_PER_PS_RATE
        return np.exp(-2.0 * rate * tau)
    early = -2.0 * tau / segments.t2_early
    late = -2.0 * segments.crossover / segments.t2_early - 2.0 * (tau - segments.crossover) / segments.t2_late
    return np.exp(np.where(tau < segments.crossover, early, late))


def integrated_fwm(
    model: EnsembleModel,
    tau_samples: Sequence[float],
    waiting: float = 0.0,
    gate: float = 5.0,
    t_step: float = 0.01,
) -> np.ndarray:
    """Time-integrated echo field for each tau.

    The detector integrates |signal| over an emission gate of half-width ``gate``
    ps centered on the echo at t = tau. The gate profile is evaluated once and
    scaled by the echo envelope, so for tau < ``gate`` it also covers emission
    times t < 0 that a real scan never samples (at tau = 0 the trace is about
    twice the integral over t >= 0). This keeps the trace a pure envelope in
    tau and therefore non-increasing.

    :param model: ensemble whose homogeneous rate or echo segments set the decay
    :param tau_samples: delays in ps, all >= 0
    :param waiting: waiting time T in ps
    :param gate: half-width of the emission gate in ps
    :param t_step: integration step in ps
    :return: integrated field amplitude per tau sample
    """
    taus = np.asarray(tau_samples, dtype=float)
    if taus.size == 0:
        raise DomainError("integrated_fwm needs at least one tau sample")
    if not np.all(np.isfinite(taus)) or np.any(taus < 0):
        raise DomainError("tau samples must be finite and >= 0")
    _check_delays(waiting)
    if gate <= 0 or t_step <= 0:
        raise DomainError("gate and t_step must be > 0")

    offsets = np.arange(-gate, gate + 0.5 * t_step, t_step)
    # |signal(tau, tau + s)| = profile(s) * envelope(tau): tau enters only through the envelope
    profile = np.abs(_kernel(model, np.zeros(1), offsets, waiting, model.mean_center, model.homogeneous_rate()))
    gated = trapezoid(profile, offsets)
    logger.debug("Integrated FWM over %d gate samples for %d delays", offsets.size, taus.size)
    return gated * echo_envelope(model, taus, waiting)
