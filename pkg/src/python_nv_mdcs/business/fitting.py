"""Model-specific fits of the analysis chain: lineshapes, thermal, diffusion, bimodal, echo."""

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import linregress

from src.python_nv_mdcs.business.tools.logger import detail, runtime
from src.python_nv_mdcs.core.constants import ANGULAR_PER_MEV, CONSTANTS, GHZ_PER_PS_RATE, MHZ_PER_GHZ
from src.python_nv_mdcs.core.enums import FitFlag
from src.python_nv_mdcs.core.errors import FitError, SpectrumError
from src.python_nv_mdcs.core.nlls import FitResult, nlls_fit
from src.python_nv_mdcs.core.physics import (
    ThermalDephasingParams,
    bose_occupation,
    thermal_dephasing_jacobian,
    thermal_dephasing_rate,
)
from src.python_nv_mdcs.core.simulator import EnsembleModel, Resonance, simulate_scan
from src.python_nv_mdcs.core.spectra import (
    SliceProfile,
    Spectrum2D,
    cross_diagonal_slice,
    diagonal_slice,
    one_quantum_spectrum,
)

DEFAULT_E_PH_INIT = 30.0  # meV
E_PH_MAX = 200.0  # meV
E_PH_MIN = 1e-9  # meV, keeps the open lower bound feasible
CENTER_COLLISION = 0.1  # meV
ABSENT_WEIGHT = 1e-3  # fraction of the larger bimodal amplitude
MIN_SEGMENT_POINTS = 3
SHORT_SEGMENT_POINTS = 4
MIN_ECHO_POINTS = 10
THERMAL_NEGLIGIBLE = 1e-6  # thermal term at the hottest point relative to gamma0
CONSTANT_MODEL_RTOL = 1e-9  # a gamma_star = 0 fit this close in residual replaces the thermal fit
FALLBACK_GAMMA_INIT = 100.0  # GHz, when the cross-diagonal never reaches half maximum


@dataclass(frozen=True)
class SeriesPoint:
    """One fitted linewidth: x is a temperature (K) or a waiting time (ps), y a rate in GHz."""

    x: float
    y: float
    y_err: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.x):
            raise FitError(f"Series abscissa must be finite, got {self.x}")
        if not math.isfinite(self.y) or self.y <= 0:
            raise FitError(f"Series ordinate must be finite and > 0, got {self.y}")
        if self.y_err is not None and (not math.isfinite(self.y_err) or self.y_err <= 0):
            raise FitError(f"Series error must be finite and > 0, got {self.y_err}")


def _series_arrays(points: Sequence[SeriesPoint]) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    x = np.array([p.x for p in points], dtype=float)
    y = np.array([p.y for p in points], dtype=float)
    if all(p.y_err is not None for p in points):
        return x, y, np.array([p.y_err for p in points], dtype=float)
    return x, y, None


# Thermal dephasing


def thermal_initial_guess(x: np.ndarray, y: np.ndarray, e_ph: float = DEFAULT_E_PH_INIT) -> ThermalDephasingParams:
    """gamma0 from the coldest point, gamma_star from the hottest, E_ph at its default."""
    gamma0 = float(y[np.argmin(x)])
    hottest = int(np.argmax(x))
    excess = max(float(y[hottest]) - gamma0, 1e-3 * gamma0)
    gamma_star = excess * math.expm1(min(e_ph / (CONSTANTS.k_b * float(x[hottest])), 700.0))
    return ThermalDephasingParams(gamma0=gamma0, gamma_star=gamma_star, e_ph=e_ph)


def _thermal_term_negligible(result: FitResult, temps: np.ndarray) -> bool:
    hottest = float(temps.max())
    occupation = float(bose_occupation(result["e_ph"], hottest)) if hottest > 0 else 0.0
    return result["gamma_star"] * occupation <= THERMAL_NEGLIGIBLE * max(result["gamma0"], 1e-300)


def _constant_thermal_result(y: np.ndarray, y_err: Optional[np.ndarray], e_ph: float) -> FitResult:
    """gamma_star pinned at 0: gamma0 is the (weighted) series mean and E_ph is unidentified."""
    weights = np.ones_like(y) if y_err is None else 1.0 / y_err**2
    gamma0 = float(np.average(y, weights=weights))
    scaled = (y - gamma0) * np.sqrt(weights)
    residual_norm = float(np.dot(scaled, scaled))
    if y_err is None:
        gamma0_sigma = math.sqrt(residual_norm / (y.size - 1) / y.size)
    else:
        gamma0_sigma = math.sqrt(1.0 / float(np.sum(weights)))
    return FitResult(
        params={"gamma0": gamma0, "gamma_star": 0.0, "e_ph": e_ph},
        sigma={"gamma0": gamma0_sigma, "gamma_star": 0.0, "e_ph": math.inf},
        residual_norm=residual_norm,
        iterations=1,
        converged=True,
        flags=(FitFlag.AT_BOUND, FitFlag.DEGENERATE),
        pinned=("gamma_star",),
    )


def fit_thermal_series(points: Sequence[SeriesPoint], init: Optional[ThermalDephasingParams] = None) -> FitResult:
    """Fit gamma(T) = gamma0 + gamma_star / (exp(E_ph / kT) - 1).

    Weighted by 1/y_err^2 when every point carries an error. When the fitted
    thermal term is negligible at the hottest point, or the fit with gamma_star
    pinned at 0 matches its residual (a flat series), the pinned fit is
    returned: gamma0 becomes the series mean, E_ph keeps its starting value
    with an infinite sigma and the result carries AT_BOUND and DEGENERATE.

    :param points: linewidths versus temperature, at least 4 spanning a ratio >= 3
    :param init: starting values, guessed from the coldest and hottest points when omitted
    :return: FitResult with gamma0 and gamma_star in GHz, e_ph in meV
    """
    if len(points) < 4:
        raise FitError(f"Thermal fit needs at least 4 points, got {len(points)}")
    x, y, y_err = _series_arrays(points)
    if np.any(x < 0) or x.max() <= 0:
        raise FitError("Temperatures must be >= 0 K and not all zero")
    if x.min() > 0 and x.max() / x.min() < 3:
        raise FitError(f"Temperatures must span a ratio >= 3, got {x.max() / x.min():.3g}")

    scale = float(y.max())
    y_n = y / scale
    err_n = None if y_err is None else y_err / scale
    start = init if init is not None else thermal_initial_guess(x, y)
    p0 = [start.gamma0 / scale, start.gamma_star / scale, min(max(start.e_ph, E_PH_MIN), E_PH_MAX)]

    def model(temps: np.ndarray, p: np.ndarray) -> np.ndarray:
        return thermal_dephasing_rate(ThermalDephasingParams(*p), temps)

    def jac(temps: np.ndarray, p: np.ndarray) -> np.ndarray:
        return thermal_dephasing_jacobian(ThermalDephasingParams(*p), temps)

    result = nlls_fit(
        model,
        (x, y_n),
        p0,
        bounds=([0.0, 0.0, E_PH_MIN], [np.inf, np.inf, E_PH_MAX]),
        names=("gamma0", "gamma_star", "e_ph"),
        jac=jac,
        y_err=err_n,
    )
    result = result.rescaled(scale, ("gamma0", "gamma_star"), residual_factor=1.0 if y_err is not None else scale**2)
    constant = _constant_thermal_result(y, y_err, p0[2])
    no_better = constant.residual_norm <= result.residual_norm * (1.0 + CONSTANT_MODEL_RTOL)
    if no_better or _thermal_term_negligible(result, x):
        detail.debug(f"Thermal term not identified up to {x.max():g} K, using the gamma_star = 0 fit")
        result = constant
    runtime.info(
        f"Thermal fit: gamma0={result['gamma0']:.4g} GHz, gamma*={result['gamma_star']:.4g} GHz, "
        f"E_ph={result['e_ph']:.4g} meV, converged={result.converged}"
    )
    return result


def thermal_curve(result: FitResult, temps: np.ndarray) -> np.ndarray:
    params = ThermalDephasingParams(result["gamma0"], result["gamma_star"], result["e_ph"])
    return np.asarray(thermal_dephasing_rate(params, np.asarray(temps, dtype=float)))


# Spectral diffusion


def fit_diffusion_series(points: Sequence[SeriesPoint]) -> FitResult:
    """Closed-form (weighted) straight line gamma = intercept + rate * T_wait.

    ``rate`` is reported in MHz/ps, ``intercept`` in GHz.
    """
    if len(points) < 2:
        raise FitError("Diffusion fit needs at least 2 points")
    x, y, y_err = _series_arrays(points)
    if np.unique(x).size < 2:
        raise FitError("Diffusion fit needs at least 2 distinct waiting times")

    weights = np.ones_like(y) if y_err is None else 1.0 / y_err
    x_mean = float(np.average(x, weights=weights**2))
    design = np.column_stack([np.ones_like(x), x - x_mean]) * weights[:, np.newaxis]
    solution, _, _, _ = np.linalg.lstsq(design, y * weights, rcond=None)
    offset, slope = (float(v) for v in solution)
    intercept = offset - slope * x_mean

    residuals = y * weights - design @ solution
    residual_norm = float(np.dot(residuals, residuals))
    dof = y.size - 2
    variance = 1.0 if y_err is not None else (residual_norm / dof if dof > 0 else 0.0)
    covariance = np.linalg.inv(design.T @ design) * variance
    slope_sigma = math.sqrt(covariance[1, 1])
    intercept_sigma = math.sqrt(max(covariance[0, 0] + x_mean**2 * covariance[1, 1] - 2 * x_mean * covariance[0, 1], 0))

    runtime.info(f"Diffusion fit: intercept={intercept:.6g} GHz, rate={slope * MHZ_PER_GHZ:.6g} MHz/ps")
    return FitResult(
        params={"intercept": intercept, "rate": slope * MHZ_PER_GHZ},
        sigma={"intercept": intercept_sigma, "rate": slope_sigma * MHZ_PER_GHZ},
        residual_norm=residual_norm,
        iterations=1,
        converged=True,
    )


def diffusion_curve(result: FitResult, waiting: np.ndarray) -> np.ndarray:
    return result["intercept"] + result["rate"] / MHZ_PER_GHZ * np.asarray(waiting, dtype=float)


# Bimodal diagonal


def _gaussian(x: np.ndarray, center: float, sigma: float) -> np.ndarray:
    return np.exp(-0.5 * ((x - center) / sigma) ** 2)


def bimodal_curve(result: FitResult, energies: np.ndarray, sigma1: float, sigma2: float) -> np.ndarray:
    energies = np.asarray(energies, dtype=float)
    return result["w1"] * _gaussian(energies, result["omega1"], sigma1) + result["w2"] * _gaussian(
        energies, result["omega2"], sigma2
    )


def _bimodal_init(profile: SliceProfile, sigma1: float, sigma2: float) -> Tuple[float, float]:
    """Lower center and separation: the two highest maxima, or a split around the single peak."""
    energies = profile.energies
    maxima = profile.local_maxima()
    if maxima.size >= 2:
        heights = np.interp(maxima, energies, profile.ordinate)
        first, second = sorted(maxima[np.argsort(heights)[-2:]])
        return float(first), float(second - first)
    peak = profile.peak_position()
    spread = 0.5 * max(sigma1, sigma2)
    low = max(peak - 0.5 * spread, float(energies[0]))
    return low, spread


def fit_bimodal_diagonal(
    profile: SliceProfile, sigma1: float, sigma2: float, equal_weights: bool = False
) -> FitResult:
    """Two Gaussians of fixed widths; only centers (and amplitudes) vary.

    Centers come back ordered (omega1 <= omega2) with ``sigma1`` attached to
    omega1. Centers closer than 0.1 meV, or a vanishing lobe, are flagged as
    degenerate; the unresolved center is then reported on top of the other.
    """
    if sigma1 <= 0 or sigma2 <= 0:
        raise FitError("Bimodal widths must be > 0")
    energies = profile.energies
    if energies.size < 5:
        raise FitError("Bimodal fit needs at least 5 slice samples")
    scale = float(profile.ordinate.max())
    if scale <= 0:
        raise FitError("Slice is identically zero")
    y_n = profile.ordinate / scale
    span = float(energies[-1] - energies[0])
    low, separation = _bimodal_init(profile, sigma1, sigma2)
    separation = min(separation, span)
    w_init = float(np.interp(low, energies, y_n)), float(np.interp(low + separation, energies, y_n))

    def model(x: np.ndarray, p: np.ndarray) -> np.ndarray:
        w1 = p[2]
        w2 = p[2] if equal_weights else p[3]
        return w1 * _gaussian(x, p[0], sigma1) + w2 * _gaussian(x, p[0] + p[1], sigma2)

    p0 = [low, separation, max(w_init[0], 1e-3)]
    lower = [float(energies[0]) - span, 0.0, 0.0]
    upper = [float(energies[-1]) + span, 2.0 * span, np.inf]
    names = ["omega1", "separation", "w1"]
    if not equal_weights:
        p0.append(max(w_init[1], 1e-3))
        lower.append(0.0)
        upper.append(np.inf)
        names.append("w2")
    raw = nlls_fit(model, (energies, y_n), p0, bounds=(lower, upper), names=names)

    omega1 = raw["omega1"]
    separation = raw["separation"]
    w1 = raw["w1"]
    w2 = raw["w1"] if equal_weights else raw["w2"]
    cov = raw.covariance
    omega2_var = cov[0, 0] + cov[1, 1] + 2 * cov[0, 1] if cov is not None else 0.0
    sigma = {
        "omega1": raw.sigma["omega1"],
        "omega2": math.sqrt(max(omega2_var, 0.0)),
        "w1": raw.sigma["w1"],
        "w2": raw.sigma["w1"] if equal_weights else raw.sigma["w2"],
    }

    flags = []
    absent = min(w1, w2) < ABSENT_WEIGHT * max(w1, w2)
    if separation < CENTER_COLLISION or absent:
        flags.append(FitFlag.DEGENERATE)
    if absent:
        # a vanishing lobe has no identifiable center
        if w1 < w2:
            omega1 = omega1 + separation
        separation = 0.0
    result = FitResult(
        params={"omega1": omega1, "omega2": omega1 + separation, "w1": w1 * scale, "w2": w2 * scale},
        sigma={**sigma, "w1": sigma["w1"] * scale, "w2": sigma["w2"] * scale},
        residual_norm=raw.residual_norm * scale**2,
        iterations=raw.iterations,
        converged=raw.converged,
        flags=raw.flags,
        pinned=raw.pinned,
        gradient_norm=raw.gradient_norm,
    ).with_flags(*flags)
    runtime.info(
        f"Bimodal fit: omega1={result['omega1']:.4f} meV, omega2={result['omega2']:.4f} meV, "
        f"flags={[f.value for f in result.flags]}"
    )
    return result.with_extras(sigma1=sigma1, sigma2=sigma2)


# Segmented echo decay


EchoTrace = Union[Sequence[Tuple[float, float]], Tuple[np.ndarray, np.ndarray]]


def _trace_arrays(trace: EchoTrace) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(trace, tuple) and len(trace) == 2 and np.ndim(trace[0]) == 1:
        taus, fields = (np.asarray(v, dtype=float) for v in trace)
    else:
        pairs = np.asarray(trace, dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise FitError("Echo trace must be a list of (tau, field) pairs")
        taus, fields = pairs[:, 0], pairs[:, 1]
    if taus.size < MIN_ECHO_POINTS:
        raise FitError(f"Echo segment fit needs at least {MIN_ECHO_POINTS} points, got {taus.size}")
    if not np.all(np.isfinite(taus)) or np.any(np.diff(taus) <= 0):
        raise FitError("Echo delays must be finite and strictly increasing")
    if not np.all(np.isfinite(fields)) or np.any(fields <= 0):
        raise FitError("Echo fields must be finite and > 0")
    return taus, fields


def _segment_line(taus: np.ndarray, log_fields: np.ndarray) -> Tuple[float, float, float, float]:
    """Slope, intercept, slope error and squared residual sum of a log-linear segment."""
    line = linregress(taus, log_fields)
    residuals = log_fields - (line.intercept + line.slope * taus)
    return float(line.slope), float(line.intercept), float(line.stderr), float(np.dot(residuals, residuals))


def _t2_from_slope(slope: float, slope_err: float) -> Tuple[float, float]:
    # field ~ exp(-2 tau / T2)
    if slope >= 0:
        return math.inf, math.inf
    return -2.0 / slope, 2.0 * slope_err / slope**2


def fit_echo_segments(trace: EchoTrace) -> FitResult:
    """Breakpoint search for a two-stage exponential echo decay.

    Every sample (leaving at least 3 points per side) is tried as the start of
    the late segment; both segments get independent log-linear fits and the
    split with the smallest total squared residual wins.

    :param trace: (taus, fields) arrays or a sequence of (tau, field) pairs, fields > 0
    :return: FitResult with t2_early, t2_late and crossover in ps
    """
    taus, fields = _trace_arrays(trace)
    log_fields = np.log(fields)
    best = None
    for split in range(MIN_SEGMENT_POINTS, taus.size - MIN_SEGMENT_POINTS + 1):
        early = _segment_line(taus[:split], log_fields[:split])
        late = _segment_line(taus[split:], log_fields[split:])
        total = early[3] + late[3]
        detail.debug(f"Echo split at tau={taus[split]:.4g} ps: residual={total:.6g}")
        if best is None or total < best[0]:
            best = (total, split, early, late)
    total, split, early, late = best

    t2_early, t2_early_err = _t2_from_slope(early[0], early[2])
    t2_late, t2_late_err = _t2_from_slope(late[0], late[2])
    flags = []
    if min(split, taus.size - split) < SHORT_SEGMENT_POINTS:
        flags.append(FitFlag.SHORT_SEGMENT)
    converged = math.isfinite(t2_early) and math.isfinite(t2_late)
    if not converged:
        flags.append(FitFlag.DEGENERATE)
    step = float(np.min(np.diff(taus)))
    result = FitResult(
        params={"t2_early": t2_early, "t2_late": t2_late, "crossover": float(taus[split])},
        sigma={"t2_early": t2_early_err, "t2_late": t2_late_err, "crossover": step},
        residual_norm=float(total),
        iterations=taus.size - 2 * MIN_SEGMENT_POINTS + 1,
        converged=converged,
        flags=tuple(flags),
    ).with_extras(log_amplitude_early=early[1], log_amplitude_late=late[1])
    runtime.info(
        f"Echo segments: T2 early={t2_early:.4g} ps, late={t2_late:.4g} ps, crossover={taus[split]:.4g} ps"
    )
    return result


def echo_segments_curve(result: FitResult, taus: np.ndarray) -> np.ndarray:
    taus = np.asarray(taus, dtype=float)
    early = result.extras["log_amplitude_early"] - 2.0 * taus / result["t2_early"]
    late = result.extras["log_amplitude_late"] - 2.0 * taus / result["t2_late"]
    return np.exp(np.where(taus < result["crossover"], early, late))


# Simultaneous diagonal / cross-diagonal lineshapes


def _cross_half_width_limit(spec: Spectrum2D, anchor: float) -> float:
    low = max(spec.omega_tau[0] + anchor, spec.omega_t[0] - anchor)
    high = min(spec.omega_tau[-1] + anchor, spec.omega_t[-1] - anchor)
    return float(min(-low, high))


def gamma_from_fwhm(fwhm: float) -> float:
    """Homogeneous rate (GHz) whose cross-diagonal magnitude has this FWHM (meV)."""
    return ANGULAR_PER_MEV * fwhm / (2.0 * math.sqrt(3.0)) / GHZ_PER_PS_RATE


def lineshape_slices(
    spec: Spectrum2D, anchor: float, diagonal_energies: np.ndarray, cross_offsets: np.ndarray, params: Sequence[float]
) -> np.ndarray:
    """Model diagonal + cross-diagonal magnitudes for (gamma, sigma, amplitude, center).

    The single-component ensemble is simulated and transformed on the same
    grid, padding and window as ``spec`` so truncation effects match.
    """
    gamma, sigma, amplitude, center = params
    ensemble = EnsembleModel(components=(Resonance(center=center, sigma=sigma),), gamma=gamma)
    model_spec = one_quantum_spectrum(simulate_scan(ensemble, spec.grid), spec.zero_pad_factor, spec.window)
    diagonal = model_spec.sample(-diagonal_energies, diagonal_energies)
    cross = model_spec.sample(-anchor + cross_offsets, anchor + cross_offsets)
    return amplitude * np.concatenate([diagonal, cross])


def fit_lineshape_pair(
    spec: Spectrum2D,
    anchor: float,
    init: Optional[Tuple[float, float]] = None,
    half_width: Optional[float] = None,
    diagonal_half_range: Optional[float] = None,
) -> FitResult:
    """Jointly fit the diagonal and cross-diagonal slices through ``anchor``.

    Returns gamma (GHz), sigma (meV), amplitude and the distribution center
    (meV). Without ``init``, gamma starts from the cross-diagonal FWHM and sigma
    from the diagonal second moment.

    :param spec: spectrum to fit; its grid, padding and window are reused by the model
    :param anchor: diagonal energy of the cross-diagonal slice in meV
    :param init: starting (gamma GHz, sigma meV)
    :param half_width: cross-diagonal half width in meV
    :param diagonal_half_range: half range of the diagonal slice around the anchor in meV
    :return: FitResult with the slice settings in ``extras``
    """
    cover_low, cover_high = spec.diagonal_coverage()
    if not cover_low <= anchor <= cover_high:
        raise SpectrumError(f"Anchor {anchor} meV outside diagonal coverage ({cover_low:.4f}, {cover_high:.4f})")
    if float(spec.sample(np.array([-anchor]), np.array([anchor]))[0]) <= 0:
        raise FitError(f"Spectrum magnitude vanishes at anchor {anchor} meV")
    step = spec.step
    cross_limit = _cross_half_width_limit(spec, anchor)
    if cross_limit < 2.0 * step:
        raise SpectrumError(f"Anchor {anchor} meV too close to the spectrum edge for a cross-diagonal slice")

    rough_diag = diagonal_slice(spec, (max(cover_low, anchor - 8.0), min(cover_high, anchor + 8.0)))
    center0 = rough_diag.peak_position()
    rough_cross = cross_diagonal_slice(spec, anchor, min(2.0, cross_limit))
    try:
        fwhm = rough_cross.fwhm()
    except SpectrumError:
        fwhm = None
    if init is None:
        gamma0 = gamma_from_fwhm(fwhm) if fwhm is not None else FALLBACK_GAMMA_INIT
        sigma0 = rough_diag.second_moment_width()
    else:
        gamma0, sigma0 = (float(v) for v in init)

    reach = diagonal_half_range if diagonal_half_range is not None else 3.0 * max(sigma0, 10 * step)
    diag_low = max(cover_low, min(anchor, center0) - reach)
    diag_high = min(cover_high, max(anchor, center0) + reach)
    if half_width is None:
        half_width = max(4.0 * fwhm, 10.0 * step) if fwhm is not None else 2.0
    half_width = min(half_width, cross_limit)

    diag = diagonal_slice(spec, (diag_low, diag_high))
    cross = cross_diagonal_slice(spec, anchor, half_width)
    data = np.concatenate([diag.ordinate, cross.ordinate])
    scale = float(data.max())
    data_n = data / scale
    diag_energies = diag.energies
    offsets = cross.abscissa

    def model(_x: np.ndarray, p: np.ndarray) -> np.ndarray:
        return lineshape_slices(spec, anchor, diag_energies, offsets, p)

    unit = model(None, np.array([gamma0, sigma0, 1.0, center0]))
    amplitude0 = float(data_n.max() / unit.max()) if unit.max() > 0 else 1.0
    runtime.info(
        f"Lineshape fit at {anchor:.3f} meV: init gamma={gamma0:.4g} GHz, sigma={sigma0:.4g} meV, "
        f"{diag.ordinate.size}+{cross.ordinate.size} samples"
    )
    raw = nlls_fit(
        model,
        (np.arange(data.size, dtype=float), data_n),
        [gamma0, sigma0, amplitude0, center0],
        bounds=([0.0, 0.0, 0.0, cover_low], [np.inf, np.inf, np.inf, cover_high]),
        names=("gamma", "sigma", "amplitude", "center"),
    )
    result = raw.rescaled(scale, ("amplitude",), residual_factor=scale**2)
    if "gamma" in result.pinned or "sigma" in result.pinned:
        result = result.with_flags(FitFlag.DEGENERATE)
    runtime.info(
        f"Lineshape fit: gamma={result['gamma']:.4g} GHz, sigma={result['sigma']:.4g} meV, "
        f"converged={result.converged}"
    )
    return result.with_extras(anchor=anchor, diagonal_low=diag_low, diagonal_high=diag_high, half_width=half_width)


def lineshape_curves(spec: Spectrum2D, result: FitResult) -> Tuple[SliceProfile, SliceProfile, np.ndarray]:
    """Data slices used by a lineshape fit and the fitted model on the same samples."""
    anchor = result.extras["anchor"]
    diag = diagonal_slice(spec, (result.extras["diagonal_low"], result.extras["diagonal_high"]))
    cross = cross_diagonal_slice(spec, anchor, result.extras["half_width"])
    params = [result["gamma"], result["sigma"], result["amplitude"], result["center"]]
    return diag, cross, lineshape_slices(spec, anchor, diag.energies, cross.abscissa, params)
