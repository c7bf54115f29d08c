"""Multi-spectrum studies built from the single fits: energy-resolved thermal
dephasing, Stark field versus temperature and spectral diffusion from a
waiting-time series of spectra."""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence

from src.python_nv_mdcs.business.fitting import (
    SeriesPoint,
    fit_bimodal_diagonal,
    fit_diffusion_series,
    fit_lineshape_pair,
    fit_thermal_series,
)
from src.python_nv_mdcs.business.tools.logger import runtime
from src.python_nv_mdcs.core.enums import FitFlag
from src.python_nv_mdcs.core.errors import FitError
from src.python_nv_mdcs.core.nlls import FitResult
from src.python_nv_mdcs.core.physics import StarkParams, field_from_splitting
from src.python_nv_mdcs.core.spectra import SliceProfile, Spectrum2D


@dataclass(frozen=True)
class AnchorThermalFit:
    """Thermal model fitted to the linewidths found at one diagonal energy."""

    anchor: float  # meV
    series: Sequence[SeriesPoint]
    result: FitResult


@dataclass(frozen=True)
class FieldPoint:
    temperature: float  # K
    splitting: float  # meV
    field: float  # MV/cm
    fit: FitResult


def _gamma_point(x: float, fit: FitResult) -> SeriesPoint:
    error = fit.sigma["gamma"]
    return SeriesPoint(x=x, y=fit["gamma"], y_err=error if error > 0 else None)


def _linewidth_series(spectra: Mapping[float, Spectrum2D], anchor: float, unit: str) -> List[SeriesPoint]:
    """Converged slice-fit linewidths at ``anchor`` in abscissa order.

    Errors are kept only when every point has one, so the downstream fit is
    either fully weighted or unweighted.
    """
    series = []
    for x in sorted(spectra):
        lineshape = fit_lineshape_pair(spectra[x], anchor)
        if not lineshape.converged:
            runtime.warning(f"Slice fit at {anchor} meV, {x} {unit} did not converge; point skipped")
            continue
        series.append(_gamma_point(x, lineshape))
    if any(p.y_err is None for p in series):
        series = [SeriesPoint(p.x, p.y) for p in series]
    return series


def thermal_parameters_by_anchor(
    spectra_by_temperature: Mapping[float, Spectrum2D], anchors: Sequence[float]
) -> Dict[float, AnchorThermalFit]:
    """Slice-fit every spectrum at each anchor, then fit gamma(T) per anchor.

    :param spectra_by_temperature: one-quantum spectra keyed by temperature in K
    :param anchors: diagonal energies (meV) at which the linewidth is measured
    :return: thermal fit and the series it was made from, per anchor
    """
    if not anchors:
        raise FitError("At least one anchor energy is required")
    fits = {}
    for anchor in anchors:
        series = _linewidth_series(spectra_by_temperature, anchor, "K")
        if len(series) < 4:
            raise FitError(f"Only {len(series)} usable linewidths at {anchor} meV")
        fits[anchor] = AnchorThermalFit(anchor=anchor, series=tuple(series), result=fit_thermal_series(series))
    return fits


def stark_field_series(
    slices_by_temperature: Mapping[float, SliceProfile], sigma1: float, sigma2: float, stark: StarkParams
) -> Sequence[FieldPoint]:
    """Bimodal fit of each diagonal slice and conversion of the splitting to a field."""
    points = []
    for temperature in sorted(slices_by_temperature):
        fit = fit_bimodal_diagonal(slices_by_temperature[temperature], sigma1, sigma2)
        splitting = fit["omega2"] - fit["omega1"]
        field = field_from_splitting(splitting, stark)
        if fit.has_flag(FitFlag.DEGENERATE):
            runtime.warning(f"Splitting at {temperature} K is unresolved")
        runtime.info(f"{temperature} K: splitting {splitting:.4f} meV -> {field:.4f} MV/cm")
        points.append(FieldPoint(temperature=temperature, splitting=splitting, field=field, fit=fit))
    return points


def diffusion_from_spectra(spectra_by_waiting: Mapping[float, Spectrum2D], anchor: float) -> FitResult:
    """Linewidth at ``anchor`` for every waiting time, then the linear diffusion fit.

    Non-converged slice fits are skipped; the fit is weighted by the slice-fit
    errors when every remaining point has one.
    """
    series = _linewidth_series(spectra_by_waiting, anchor, "ps")
    if len(series) < 2:
        raise FitError(f"Only {len(series)} usable linewidths at {anchor} meV")
    result = fit_diffusion_series(series)
    return result.with_extras(anchor=anchor)
