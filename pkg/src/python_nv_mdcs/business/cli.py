"""Command-line pipeline: simulate scans, build spectra, cut slices and run every fit.

Exit codes: 0 on success, 1 when a fit did not converge (its results are still
written and flagged), 2 when inputs fail validation.
"""

import argparse
import logging
import os
from dataclasses import replace
from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np

from src.python_nv_mdcs import __version__
from src.python_nv_mdcs.business import fileio
from src.python_nv_mdcs.business.fitting import (
    SeriesPoint,
    bimodal_curve,
    diffusion_curve,
    echo_segments_curve,
    fit_bimodal_diagonal,
    fit_diffusion_series,
    fit_echo_segments,
    fit_lineshape_pair,
    fit_thermal_series,
    lineshape_curves,
    thermal_curve,
)
from src.python_nv_mdcs.business.tools.logger import configure_stream, detail, runtime, set_level, setup_logging
from src.python_nv_mdcs.core.enums import SliceDirection, Window
from src.python_nv_mdcs.core.errors import MdcsError
from src.python_nv_mdcs.core.nlls import FitResult
from src.python_nv_mdcs.core.physics import StarkParams, field_from_splitting, splitting_from_field
from src.python_nv_mdcs.core.simulator import ScanGrid, TimeDomainScan, integrated_fwm, simulate_scan
from src.python_nv_mdcs.core.spectra import (
    DEFAULT_SAMPLES,
    DEFAULT_STEP_PS,
    DEFAULT_ZERO_PAD,
    cross_diagonal_slice,
    diagonal_slice,
    one_quantum_spectrum,
)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_INVALID = 2

RunConfig = argparse.Namespace

LINESHAPE_UNITS = {"gamma": "GHz", "sigma": "meV", "amplitude": "", "center": "meV"}
THERMAL_UNITS = {"gamma0": "GHz", "gamma_star": "GHz", "e_ph": "meV"}
DIFFUSION_UNITS = {"intercept": "GHz", "rate": "MHz/ps"}
BIMODAL_UNITS = {"omega1": "meV", "omega2": "meV", "w1": "", "w2": ""}
ECHO_UNITS = {"t2_early": "ps", "t2_late": "ps", "crossover": "ps"}


def plot_path(out: str, suffix: str = "") -> str:
    stem, _ = os.path.splitext(out)
    return f"{stem}{suffix}_plot.csv"


def apply_noise(values: np.ndarray, level: float, seed: Optional[int]) -> np.ndarray:
    """Multiplicative Gaussian noise of relative size ``level``; identity when level is 0."""
    if level <= 0:
        return values
    rng = np.random.default_rng(seed)
    return values * (1.0 + level * rng.standard_normal(np.shape(values)))


def _finish(config: RunConfig, result: FitResult, units: Mapping[str, str], extra: Optional[Dict] = None) -> int:
    record = fileio.provenance(config.inputs, command=config.command)
    fileio.write_params(config.out, result, units, record, extra)
    runtime.info(f"Wrote {config.out}")
    if not result.converged:
        runtime.warning(f"Fit did not converge: {[flag.value for flag in result.flags]}")
        return EXIT_NOT_CONVERGED
    return EXIT_OK


# Sub-commands


def cmd_simulate(config: RunConfig) -> int:
    model = fileio.read_model(config.config)
    if config.temperature is not None:
        model = replace(model, temperature=config.temperature)
    grid = ScanGrid.uniform(config.samples, config.samples, config.step, waiting=config.waiting, carrier=config.carrier)
    scan = simulate_scan(model, grid)
    if config.noise > 0:
        scan = TimeDomainScan(
            grid=scan.grid,
            values=apply_noise(scan.values, config.noise, config.seed),
            metadata={**scan.metadata, "noise": config.noise, "seed": config.seed},
        )
    fileio.write_scan(config.out, scan)
    runtime.info(f"Wrote {scan.grid.shape[0]}x{scan.grid.shape[1]} scan to {config.out}")
    return EXIT_OK


def cmd_spectrum(config: RunConfig) -> int:
    scan = fileio.read_scan(config.input)
    spec = one_quantum_spectrum(scan, config.zero_pad, Window(config.window))
    fileio.write_spectrum(config.out, spec)
    low, high = spec.diagonal_coverage()
    runtime.info(f"Wrote spectrum to {config.out}, diagonal coverage {low:.3f}..{high:.3f} meV")
    return EXIT_OK


def cmd_slice(config: RunConfig) -> int:
    spec = fileio.read_spectrum(config.input)
    if SliceDirection(config.direction) is SliceDirection.DIAGONAL:
        low, high = config.range if config.range else spec.diagonal_coverage()
        profile = diagonal_slice(spec, (low, high))
    else:
        if config.anchor is None:
            raise MdcsError("A cross-diagonal slice needs --anchor")
        profile = cross_diagonal_slice(spec, config.anchor, config.half_width)
    fileio.write_slice(config.out, profile)
    runtime.info(f"Wrote {profile.abscissa.size}-point {profile.direction.value} slice to {config.out}")
    return EXIT_OK


def cmd_fit_slices(config: RunConfig) -> int:
    spec = fileio.read_spectrum(config.input)
    result = fit_lineshape_pair(spec, config.anchor, half_width=config.half_width)
    diag, cross, model = lineshape_curves(spec, result)
    n_diag = diag.abscissa.size
    fileio.write_plot_table(plot_path(config.out, "_diagonal"), diag.energies, diag.ordinate, model[:n_diag])
    fileio.write_plot_table(plot_path(config.out, "_cross"), cross.abscissa, cross.ordinate, model[n_diag:])
    if config.append_series:
        if config.x is None:
            raise MdcsError("--append-series needs --x (temperature or waiting time)")
        points = fileio.read_series(config.append_series) if os.path.isfile(config.append_series) else []
        points = [p for p in points if p.x != config.x]
        error = result.sigma["gamma"]
        points.append(SeriesPoint(config.x, result["gamma"], error if error > 0 else None))
        fileio.write_series(config.append_series, sorted(points, key=lambda p: p.x))
    return _finish(config, result, LINESHAPE_UNITS, dict(result.extras))


def cmd_fit_temperature(config: RunConfig) -> int:
    points = fileio.read_series(config.input)
    result = fit_thermal_series(points)
    x = np.array([p.x for p in points])
    fileio.write_plot_table(plot_path(config.out), x, [p.y for p in points], thermal_curve(result, x))
    return _finish(config, result, THERMAL_UNITS)


def cmd_fit_diffusion(config: RunConfig) -> int:
    points = fileio.read_series(config.input)
    result = fit_diffusion_series(points)
    x = np.array([p.x for p in points])
    fileio.write_plot_table(plot_path(config.out), x, [p.y for p in points], diffusion_curve(result, x))
    return _finish(config, result, DIFFUSION_UNITS)


def cmd_fit_bimodal(config: RunConfig) -> int:
    profile = fileio.read_slice(config.input)
    result = fit_bimodal_diagonal(profile, config.sigma1, config.sigma2, equal_weights=config.equal_weights)
    curve = bimodal_curve(result, profile.energies, config.sigma1, config.sigma2)
    fileio.write_plot_table(plot_path(config.out), profile.energies, profile.ordinate, curve)
    splitting = result["omega2"] - result["omega1"]
    extra = {"splitting": splitting, "field": field_from_splitting(splitting, StarkParams(config.chi_perp))}
    return _finish(config, result, BIMODAL_UNITS, extra)


def cmd_fit_echo(config: RunConfig) -> int:
    points = fileio.read_series(config.input)
    taus = np.array([p.x for p in points])
    fields = np.array([p.y for p in points])
    result = fit_echo_segments((taus, fields))
    fileio.write_plot_table(plot_path(config.out), taus, fields, echo_segments_curve(result, taus))
    return _finish(config, result, ECHO_UNITS, {"difference": result["t2_early"] - result["t2_late"]})


def cmd_fwm(config: RunConfig) -> int:
    model = fileio.read_model(config.config)
    if config.temperature is not None:
        model = replace(model, temperature=config.temperature)
    taus = np.arange(0.0, config.tau_max + 0.5 * config.tau_step, config.tau_step)
    fields = apply_noise(integrated_fwm(model, taus, config.waiting), config.noise, config.seed)
    points = [SeriesPoint(float(tau), float(value)) for tau, value in zip(taus, fields)]
    fileio.write_series(config.out, points, {"x_unit": "ps", "y_unit": "a.u."})
    runtime.info(f"Wrote {len(points)}-point integrated FWM trace to {config.out}")
    return EXIT_OK


def cmd_field(config: RunConfig) -> int:
    stark = StarkParams(config.chi_perp)
    if config.splitting is not None:
        value = field_from_splitting(config.splitting, stark)
        print(f"field = {value:.6g} MV/cm")
    else:
        value = splitting_from_field(config.field, stark)
        print(f"splitting = {value:.6g} meV")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "slice": cmd_slice,
    "fit-slices": cmd_fit_slices,
    "fit-temperature": cmd_fit_temperature,
    "fit-diffusion": cmd_fit_diffusion,
    "fit-bimodal": cmd_fit_bimodal,
    "fit-echo": cmd_fit_echo,
    "fwm": cmd_fwm,
    "field": cmd_field,
}


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input", help="Input file")
    common.add_argument("--out", help="Output file")
    common.add_argument("--config", help="Model description file")
    common.add_argument("--seed", type=int, default=None, help="Seed for noise injection")
    common.add_argument("--noise", type=float, default=0.0, help="Relative multiplicative Gaussian noise level")
    common.add_argument("--verbose", action="store_true", help="Debug logging")
    common.add_argument("--log-file", help="Also log to this file")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nv-mdcs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common_options()

    simulate = sub.add_parser("simulate", parents=[common], help="Simulate a rephasing scan from a model file")
    simulate.add_argument("--temperature", type=float, help="Override the model temperature (K)")
    simulate.add_argument("--waiting", type=float, default=0.0, help="Waiting time (ps)")
    simulate.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="Samples per delay axis")
    simulate.add_argument("--step", type=float, default=DEFAULT_STEP_PS, help="Delay step (ps)")
    simulate.add_argument("--carrier", type=float, help="Rotating-frame energy (meV), default the model mean")

    spectrum = sub.add_parser("spectrum", parents=[common], help="One-quantum spectrum of a scan file")
    spectrum.add_argument("--zero-pad", type=int, default=DEFAULT_ZERO_PAD)
    spectrum.add_argument("--window", choices=[w.value for w in Window], default=Window.NONE.value)

    slicer = sub.add_parser("slice", parents=[common], help="Diagonal or cross-diagonal slice of a spectrum")
    slicer.add_argument("--direction", choices=[d.value for d in SliceDirection], default=SliceDirection.DIAGONAL.value)
    slicer.add_argument("--range", type=float, nargs=2, metavar=("LOW", "HIGH"), help="Diagonal energies (meV)")
    slicer.add_argument("--anchor", type=float, help="Cross-diagonal anchor energy (meV)")
    slicer.add_argument("--half-width", type=float, default=2.0, help="Cross-diagonal half width (meV)")

    slices = sub.add_parser("fit-slices", parents=[common], help="Joint diagonal/cross-diagonal lineshape fit")
    slices.add_argument("--anchor", type=float, required=True, help="Diagonal energy of the slices (meV)")
    slices.add_argument("--half-width", type=float, help="Cross-diagonal half width (meV)")
    slices.add_argument("--append-series", help="Add the fitted gamma to this series file")
    slices.add_argument("--x", type=float, help="Abscissa of the appended point (K or ps)")

    sub.add_parser("fit-temperature", parents=[common], help="Thermal dephasing fit of a gamma(T) series")
    sub.add_parser("fit-diffusion", parents=[common], help="Spectral diffusion fit of a gamma(T_wait) series")

    bimodal = sub.add_parser("fit-bimodal", parents=[common], help="Two-Gaussian fit of a diagonal slice")
    bimodal.add_argument("--sigma1", type=float, required=True, help="Width of the lower lobe (meV)")
    bimodal.add_argument("--sigma2", type=float, required=True, help="Width of the upper lobe (meV)")
    bimodal.add_argument("--equal-weights", action="store_true")
    bimodal.add_argument("--chi-perp", type=float, default=StarkParams().chi_perp, help="MHz/(V/cm)")

    sub.add_parser("fit-echo", parents=[common], help="Two-segment fit of an integrated FWM trace")

    fwm = sub.add_parser("fwm", parents=[common], help="Integrated FWM trace of a model file")
    fwm.add_argument("--temperature", type=float, help="Override the model temperature (K)")
    fwm.add_argument("--waiting", type=float, default=0.0, help="Waiting time (ps)")
    fwm.add_argument("--tau-max", type=float, default=40.0, help="Last delay (ps)")
    fwm.add_argument("--tau-step", type=float, default=0.5, help="Delay step (ps)")

    field = sub.add_parser("field", parents=[common], help="Convert between Stark splitting and field")
    group = field.add_mutually_exclusive_group(required=True)
    group.add_argument("--splitting", type=float, help="Total splitting (meV)")
    group.add_argument("--field", type=float, help="Field (MV/cm)")
    field.add_argument("--chi-perp", type=float, default=StarkParams().chi_perp, help="MHz/(V/cm)")
    return parser


def _validate(config: RunConfig) -> None:
    needs_input = config.command not in ("simulate", "fwm", "field")
    if needs_input and not config.input:
        raise MdcsError(f"{config.command} needs --in")
    if config.command in ("simulate", "fwm") and not config.config:
        raise MdcsError(f"{config.command} needs --config")
    if config.command != "field" and not config.out:
        raise MdcsError(f"{config.command} needs --out")
    if config.noise < 0:
        raise MdcsError("--noise must be >= 0")
    config.inputs = [path for path in (config.input, config.config) if path]
    for path in config.inputs:
        if not os.path.isfile(path):
            raise MdcsError(f"No such file: {path}")


def _configure_logging(config: RunConfig) -> None:
    if config.verbose:
        set_level(logging.DEBUG)
        setup_logging(logging.DEBUG, "src.python_nv_mdcs")
    if config.log_file:
        configure_stream(runtime, config.log_file)
        configure_stream(detail, config.log_file)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    config = parser.parse_args(argv)
    _configure_logging(config)
    try:
        _validate(config)
        return COMMANDS[config.command](config)
    except MdcsError as error:
        runtime.error(f"{config.command}: {error}")
        return EXIT_INVALID
    except OSError as error:
        runtime.error(f"{config.command}: {error}")
        return EXIT_INVALID
