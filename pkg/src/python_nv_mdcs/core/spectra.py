"""One-quantum 2D spectra: double Fourier transform, axis calibration and slicing."""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from src.python_nv_mdcs.core.constants import ANGULAR_PER_MEV
from src.python_nv_mdcs.core.enums import SliceDirection, Window
from src.python_nv_mdcs.core.errors import GridError, SpectrumError
from src.python_nv_mdcs.core.simulator import UNIFORMITY_RTOL, ScanGrid, TimeDomainScan

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 256
DEFAULT_STEP_PS = 0.05
DEFAULT_ZERO_PAD = 2
DEFAULT_WINDOW = Window.NONE

_EDGE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Spectrum2D:
    """Complex one-quantum spectrum on absolute (omega_tau, omega_t) axes in meV.

    ``omega_tau`` is negative by convention: a resonance at E appears at (-E, E).
    The acquisition ``grid`` is kept so the forward model can be regenerated on
    identical sampling.
    """

    omega_tau: np.ndarray
    omega_t: np.ndarray
    values: np.ndarray
    grid: ScanGrid
    zero_pad_factor: int = DEFAULT_ZERO_PAD
    window: Window = DEFAULT_WINDOW

    def __post_init__(self):
        object.__setattr__(self, "omega_tau", np.asarray(self.omega_tau, dtype=float))
        object.__setattr__(self, "omega_t", np.asarray(self.omega_t, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        for name, axis in (("omega_tau", self.omega_tau), ("omega_t", self.omega_t)):
            if axis.ndim != 1 or axis.size < 2 or np.any(np.diff(axis) <= 0):
                raise GridError(f"Spectrum axis {name} must be strictly increasing")
        if self.values.shape != (self.omega_tau.size, self.omega_t.size):
            raise GridError(
                f"Spectrum values have shape {self.values.shape}, axes give "
                f"{(self.omega_tau.size, self.omega_t.size)}"
            )

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def step(self) -> float:
        """Slice sampling step in meV: the finer of the two axis spacings."""
        return float(min(self.omega_tau[1] - self.omega_tau[0], self.omega_t[1] - self.omega_t[0]))

    def diagonal_coverage(self) -> Tuple[float, float]:
        """Interval of diagonal energies E for which (-E, E) lies inside the grid."""
        low = max(self.omega_t[0], -self.omega_tau[-1])
        high = min(self.omega_t[-1], -self.omega_tau[0])
        return float(low), float(high)

    def interpolator(self) -> RegularGridInterpolator:
        return RegularGridInterpolator((self.omega_tau, self.omega_t), self.magnitude, method="linear")

    def sample(self, omega_tau: np.ndarray, omega_t: np.ndarray) -> np.ndarray:
        """Bilinear magnitude at arbitrary points inside the grid."""
        omega_tau = np.asarray(omega_tau, dtype=float)
        omega_t = np.asarray(omega_t, dtype=float)
        tol = _EDGE_TOLERANCE * max(1.0, abs(self.omega_t[-1]))
        outside = (
            (omega_tau < self.omega_tau[0] - tol)
            | (omega_tau > self.omega_tau[-1] + tol)
            | (omega_t < self.omega_t[0] - tol)
            | (omega_t > self.omega_t[-1] + tol)
        )
        if np.any(outside):
            raise SpectrumError("Slice points fall outside the spectrum grid")
        points = np.column_stack(
            [
                np.clip(omega_tau, self.omega_tau[0], self.omega_tau[-1]),
                np.clip(omega_t, self.omega_t[0], self.omega_t[-1]),
            ]
        )
        return self.interpolator()(points)


@dataclass(frozen=True)
class SliceProfile:
    """Magnitude sampled along a line through the spectrum.

    ``abscissa`` is the signed offset in meV from ``anchor``; ``energies`` gives
    the emission energy |omega_t| of each sample.
    """

    abscissa: np.ndarray
    ordinate: np.ndarray
    anchor: float
    direction: SliceDirection = SliceDirection.DIAGONAL

    def __post_init__(self):
        object.__setattr__(self, "abscissa", np.asarray(self.abscissa, dtype=float))
        object.__setattr__(self, "ordinate", np.asarray(self.ordinate, dtype=float))
        if self.abscissa.shape != self.ordinate.shape or self.abscissa.ndim != 1:
            raise SpectrumError("Slice abscissa and ordinate must be 1D arrays of equal length")
        if self.abscissa.size >= 2 and np.any(np.diff(self.abscissa) <= 0):
            raise SpectrumError("Slice abscissa must be strictly increasing")
        if np.any(self.ordinate < 0) or not np.all(np.isfinite(self.ordinate)):
            raise SpectrumError("Slice ordinate must be finite and non-negative")

    @property
    def energies(self) -> np.ndarray:
        return self.anchor + self.abscissa

    def scaled(self, factor: float) -> "SliceProfile":
        return SliceProfile(self.abscissa, self.ordinate * factor, self.anchor, self.direction)

    def peak_position(self) -> float:
        return float(self.energies[int(np.argmax(self.ordinate))])

    def fwhm(self) -> float:
        """Full width at half maximum around the global peak, linear crossings."""
        y = self.ordinate
        x = self.abscissa
        peak = int(np.argmax(y))
        half = 0.5 * y[peak]
        left = peak
        while left > 0 and y[left] >= half:
            left -= 1
        right = peak
        while right < y.size - 1 and y[right] >= half:
            right += 1
        if y[left] >= half or y[right] >= half:
            raise SpectrumError("Slice does not fall below half maximum on both sides of the peak")
        x_left = x[left] + (half - y[left]) * (x[left + 1] - x[left]) / (y[left + 1] - y[left])
        x_right = x[right - 1] + (half - y[right - 1]) * (x[right] - x[right - 1]) / (y[right] - y[right - 1])
        return float(x_right - x_left)

    def second_moment_width(self) -> float:
        """Standard deviation of the ordinate read as a distribution over energy."""
        weights = self.ordinate / self.ordinate.sum()
        mean = float(np.dot(weights, self.abscissa))
        return math.sqrt(float(np.dot(weights, (self.abscissa - mean) ** 2)))

    def local_maxima(self, min_relative_height: float = 1e-3) -> np.ndarray:
        """Energies of interior local maxima above ``min_relative_height`` of the peak."""
        y = self.ordinate
        if y.size < 3:
            return np.empty(0)
        interior = (y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]) & (y[1:-1] >= min_relative_height * y.max())
        return self.energies[1:-1][interior]


def _cos2_taper(n: int) -> np.ndarray:
    return np.cos(0.5 * np.pi * np.arange(n) / (n - 1)) ** 2


def _check_uniform(axis: np.ndarray, name: str) -> float:
    steps = np.diff(axis)
    if steps.size == 0 or np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=UNIFORMITY_RTOL, atol=0.0):
        raise GridError(f"Axis {name} is not uniformly sampled")
    return float(steps[0])


def _frequency_axis(n: int, step: float) -> np.ndarray:
    """Angular frequency offsets in meV for ``n`` samples spaced ``step`` ps."""
    return 2.0 * np.pi * np.fft.fftshift(np.fft.fftfreq(n, d=step)) / ANGULAR_PER_MEV


def one_quantum_spectrum(
    scan: TimeDomainScan, zero_pad_factor: int = DEFAULT_ZERO_PAD, window: Window = DEFAULT_WINDOW
) -> Spectrum2D:
    """Fourier transform the echo along tau and t.

    The transform is unitary and uses the exp(+i omega delay) kernel on both
    axes, so an oscillation exp(i D tau - i D t) lands at omega_tau = -D,
    omega_t = +D. The window is applied before zero padding.

    :param scan: time-domain scan on a uniform grid
    :param zero_pad_factor: output size per axis relative to the scan, >= 1
    :param window: apodization applied along both delays
    :return: spectrum on absolute energy axes in meV
    """
    if int(zero_pad_factor) != zero_pad_factor or zero_pad_factor < 1:
        raise GridError(f"zero_pad_factor must be an integer >= 1, got {zero_pad_factor}")
    zero_pad_factor = int(zero_pad_factor)
    window = Window(window)
    grid = scan.grid
    tau_step = _check_uniform(grid.tau, "tau")
    t_step = _check_uniform(grid.t, "t")

    data = scan.values
    if window is Window.COS2:
        data = data * np.outer(_cos2_taper(grid.tau.size), _cos2_taper(grid.t.size))
    shape = (grid.tau.size * zero_pad_factor, grid.t.size * zero_pad_factor)
    values = np.fft.fftshift(np.fft.ifft2(data, s=shape, norm="ortho"))

    carrier = scan.carrier
    omega_tau = -carrier + _frequency_axis(shape[0], tau_step)
    omega_t = carrier + _frequency_axis(shape[1], t_step)
    logger.debug("One-quantum spectrum %dx%d, pad=%d, window=%s", shape[0], shape[1], zero_pad_factor, window.value)
    return Spectrum2D(
        omega_tau=omega_tau,
        omega_t=omega_t,
        values=values,
        grid=grid,
        zero_pad_factor=zero_pad_factor,
        window=window,
    )


def _check_finite_range(low: float, high: float) -> None:
    if not (math.isfinite(low) and math.isfinite(high)) or high < low:
        raise SpectrumError(f"Invalid slice range ({low}, {high})")


def diagonal_slice(spec: Spectrum2D, energy_range: Tuple[float, float]) -> SliceProfile:
    """Magnitude along |omega_tau| = |omega_t| for diagonal energies in ``energy_range``."""
    low, high = (float(v) for v in energy_range)
    _check_finite_range(low, high)
    cover_low, cover_high = spec.diagonal_coverage()
    tol = _EDGE_TOLERANCE * max(1.0, abs(cover_high))
    if low < cover_low - tol or high > cover_high + tol:
        raise SpectrumError(
            f"Diagonal range ({low:.4f}, {high:.4f}) meV outside coverage ({cover_low:.4f}, {cover_high:.4f}) meV"
        )
    step = spec.step
    count = int(math.floor((high - low) / step + 1e-9)) + 1
    abscissa = step * np.arange(count)
    energies = low + abscissa
    ordinate = spec.sample(-energies, energies)
    return SliceProfile(abscissa=abscissa, ordinate=ordinate, anchor=low, direction=SliceDirection.DIAGONAL)


def cross_diagonal_slice(spec: Spectrum2D, anchor: float, half_width: float) -> SliceProfile:
    """Magnitude along the anti-diagonal through (-anchor, anchor).

    Sample k sits at (-anchor + d, anchor + d) with d = k * step and |d| <= half_width.

    :param spec: one-quantum spectrum
    :param anchor: diagonal energy in meV
    :param half_width: largest offset from the anchor in meV
    :return: profile whose abscissa is the signed offset d
    """
    anchor = float(anchor)
    if not math.isfinite(anchor) or not math.isfinite(half_width) or half_width <= 0:
        raise SpectrumError(f"Invalid cross-diagonal slice at {anchor} with half width {half_width}")
    cover_low, cover_high = spec.diagonal_coverage()
    if not cover_low <= anchor <= cover_high:
        raise SpectrumError(f"Anchor {anchor:.4f} meV outside diagonal coverage ({cover_low:.4f}, {cover_high:.4f})")
    step = spec.step
    count = int(math.floor(half_width / step + 1e-9))
    offsets = step * np.arange(-count, count + 1)
    ordinate = spec.sample(-anchor + offsets, anchor + offsets)
    return SliceProfile(abscissa=offsets, ordinate=ordinate, anchor=anchor, direction=SliceDirection.CROSS_DIAGONAL)


def default_grid(waiting: float = 0.0, carrier: Optional[float] = None) -> ScanGrid:
    """256 x 256 samples at 50 fs."""
    return ScanGrid.uniform(DEFAULT_SAMPLES, DEFAULT_SAMPLES, DEFAULT_STEP_PS, waiting=waiting, carrier=carrier)
