"""Plain-text file formats for scans, spectra, series, models, fit results and plot tables.

Every file starts with a commented header (``# key = value``) carrying at least
``format_version`` and ``kind``. Tables follow as one column-name row and
comma-separated data rows; numbers use 17 significant digits so a write/read
cycle reproduces every float exactly.
"""

import hashlib
import math
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.python_nv_mdcs import __version__
from src.python_nv_mdcs.business.fitting import SeriesPoint
from src.python_nv_mdcs.core.enums import FitFlag, SliceDirection, Window
from src.python_nv_mdcs.core.errors import FormatError, MdcsError
from src.python_nv_mdcs.core.nlls import FitResult
from src.python_nv_mdcs.core.physics import SpectralDiffusionParams, ThermalDephasingParams
from src.python_nv_mdcs.core.simulator import EchoSegments, EnsembleModel, Resonance, ScanGrid, TimeDomainScan
from src.python_nv_mdcs.core.spectra import SliceProfile, Spectrum2D

FORMAT_VERSION = 1
NUMBER_FORMAT = "%.17g"

SCAN_COLUMNS = ("tau_ps", "t_ps", "real", "imag")
SPECTRUM_COLUMNS = ("omega_tau_mev", "omega_t_mev", "real", "imag")
MODEL_COLUMNS = ("center_mev", "sigma_mev", "weight")
PLOT_COLUMNS = ("x", "data", "model")
SLICE_COLUMNS = ("offset_mev", "energy_mev", "magnitude")


def _number(value: float) -> str:
    return NUMBER_FORMAT % value


@dataclass
class Table:
    """Parsed header, column names and numeric rows of a tabular file."""

    path: str
    header: Dict[str, str]
    columns: Tuple[str, ...]
    rows: np.ndarray
    header_lines: Dict[str, int] = field(default_factory=dict)
    first_row_line: int = 0

    def get(self, key: str, default: Optional[str] = None) -> Optional[str]:
        return self.header.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.header:
            raise FormatError(f"Missing header key '{key}'", self.path)
        return self.header[key]

    def number(self, key: str, default: Optional[float] = None) -> Optional[float]:
        if key not in self.header:
            if default is None:
                self.require(key)
            return default
        return _parse_float(self.header[key], self.path, self.header_lines.get(key))

    def integer(self, key: str) -> int:
        value = self.number(key)
        if value is None or value != int(value) or value < 0:
            raise FormatError(
                f"Header key '{key}' must be a non-negative integer", self.path, self.header_lines.get(key)
            )
        return int(value)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]


def _parse_float(text: str, path: str, line: Optional[int]) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"Not a number: '{text.strip()}'", path, line) from None
    if not math.isfinite(value):
        raise FormatError(f"Non-finite value '{text.strip()}'", path, line)
    return value


def _header_lines(kind: str, header: Mapping[str, object]) -> List[str]:
    lines = [f"# format_version = {FORMAT_VERSION}", f"# kind = {kind}"]
    for key, value in header.items():
        text = _number(value) if isinstance(value, float) else str(value)
        lines.append(f"# {key} = {text}")
    return lines


def write_table(
    path: str, kind: str, header: Mapping[str, object], columns: Sequence[str], rows: np.ndarray
) -> None:
    """Write a headed numeric table; rows must have one value per column."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != len(columns):
        raise MdcsError(f"Table rows have shape {rows.shape}, expected (n, {len(columns)})")
    if not np.all(np.isfinite(rows)):
        raise MdcsError(f"Refusing to write non-finite values to {path}")
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame = pd.DataFrame(rows, columns=list(columns))
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(_header_lines(kind, header)) + "\n")
        frame.to_csv(handle, index=False, float_format=NUMBER_FORMAT, lineterminator="\n")


def _read_header(path: str, lines: Iterable[Tuple[int, str]]) -> Tuple[Dict[str, str], Dict[str, int]]:
    header: Dict[str, str] = {}
    positions: Dict[str, int] = {}
    for number, raw in lines:
        body = raw[1:].strip()
        if not body or "=" not in body:
            continue
        key, _, value = body.partition("=")
        header[key.strip()] = value.strip()
        positions[key.strip()] = number
    return header, positions


def _check_kind(path: str, header: Dict[str, str], positions: Dict[str, int], kind: str) -> None:
    if "format_version" not in header:
        raise FormatError("Missing format_version header", path, 1)
    if header["format_version"] != str(FORMAT_VERSION):
        raise FormatError(
            f"Unsupported format_version {header['format_version']} (expected {FORMAT_VERSION})",
            path,
            positions["format_version"],
        )
    if header.get("kind") != kind:
        raise FormatError(f"Expected a {kind} file, found kind '{header.get('kind')}'", path, positions.get("kind"))


def _width_error(path: str, text_lines: List[str], body: List[int], width: int) -> FormatError:
    """Locate the first data row whose field count differs from the column row."""
    for number in body[1:]:
        found = len(text_lines[number - 1].split(","))
        if found != width:
            return FormatError(f"Expected {width} fields, found {found}", path, number)
    return FormatError("Malformed table", path, body[0])


def _numeric_frame(path: str, frame: pd.DataFrame, text_lines: List[str], body: List[int]) -> np.ndarray:
    """Coerce every cell to float and map the first bad one back to its file line."""
    if frame.empty:
        return np.empty((0, frame.shape[1]))
    numeric = frame.apply(pd.to_numeric, errors="coerce")
    values = numeric.to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if not bad.any():
        return values
    row, col = (int(i) for i in np.argwhere(bad)[0])
    number = body[row + 1]
    fields = text_lines[number - 1].split(",")
    if len(fields) != frame.shape[1]:
        raise _width_error(path, text_lines, body, frame.shape[1])
    cell = fields[col].strip()
    if np.isnan(values[row, col]) and not pd.isna(frame.iat[row, col]):
        raise FormatError(f"Not a number: '{cell}'", path, number)
    raise FormatError(f"Non-finite value '{cell}'", path, number)


def read_table(path: str, kind: str, required: Sequence[str]) -> Table:
    """Parse a file written by :func:`write_table`, checking version, kind and columns."""
    if not os.path.isfile(path):
        raise FormatError("File not found", path)
    with open(path, "r", encoding="utf-8", newline="") as handle:
        text_lines = handle.read().splitlines()

    comments = [(i + 1, line) for i, line in enumerate(text_lines) if line.startswith("#")]
    header, positions = _read_header(path, comments)
    _check_kind(path, header, positions, kind)

    body = [i + 1 for i, line in enumerate(text_lines) if line.strip() and not line.startswith("#")]
    if not body:
        raise FormatError("Missing column header row", path)
    try:
        frame = pd.read_csv(
            path, comment="#", skip_blank_lines=True, skipinitialspace=True, float_precision="round_trip"
        )
    except pd.errors.ParserError:
        header_width = len(text_lines[body[0] - 1].split(","))
        raise _width_error(path, text_lines, body, header_width) from None
    columns = tuple(str(name).strip() for name in frame.columns)
    missing = [name for name in required if name not in columns]
    if missing:
        raise FormatError(f"Missing columns {missing}", path, body[0])

    return Table(
        path=path,
        header=header,
        columns=columns,
        rows=_numeric_frame(path, frame, text_lines, body),
        header_lines=positions,
        first_row_line=body[1] if len(body) > 1 else body[0],
    )


# Scans


def write_scan(path: str, scan: TimeDomainScan) -> None:
    grid = scan.grid
    tau, t = np.meshgrid(grid.tau, grid.t, indexing="ij")
    rows = np.column_stack([tau.ravel(), t.ravel(), scan.values.real.ravel(), scan.values.imag.ravel()])
    header = {
        "carrier_mev": scan.carrier,
        "waiting_ps": float(grid.waiting),
        "n_tau": grid.tau.size,
        "n_t": grid.t.size,
        "tau_step_ps": grid.tau_step,
        "t_step_ps": grid.t_step,
    }
    header.update({f"meta.{key}": value for key, value in scan.metadata.items()})
    write_table(path, "scan", header, SCAN_COLUMNS, rows)


def _metadata(table: Table) -> Dict[str, object]:
    metadata: Dict[str, object] = {}
    for key, value in table.header.items():
        if not key.startswith("meta."):
            continue
        try:
            number = float(value)
            metadata[key[5:]] = int(number) if value.lstrip("-").isdigit() else number
        except ValueError:
            metadata[key[5:]] = value
    return metadata


def read_scan(path: str) -> TimeDomainScan:
    table = read_table(path, "scan", SCAN_COLUMNS)
    n_tau, n_t = table.integer("n_tau"), table.integer("n_t")
    if table.rows.shape[0] != n_tau * n_t:
        raise FormatError(f"Expected {n_tau * n_t} records, found {table.rows.shape[0]}", path)
    tau = table.column("tau_ps").reshape(n_tau, n_t)
    t = table.column("t_ps").reshape(n_tau, n_t)
    if not (np.all(tau == tau[:, :1]) and np.all(t == t[:1, :])):
        raise FormatError("Records are not a row-major (tau, t) grid", path, table.first_row_line)
    values = table.column("real") + 1j * table.column("imag")
    try:
        grid = ScanGrid(tau=tau[:, 0], t=t[0], waiting=table.number("waiting_ps"), carrier=table.number("carrier_mev"))
        return TimeDomainScan(grid=grid, values=values.reshape(n_tau, n_t), metadata=_metadata(table))
    except MdcsError as error:
        raise FormatError(str(error), path) from error


# Spectra


def write_spectrum(path: str, spec: Spectrum2D) -> None:
    omega_tau, omega_t = np.meshgrid(spec.omega_tau, spec.omega_t, indexing="ij")
    rows = np.column_stack([omega_tau.ravel(), omega_t.ravel(), spec.values.real.ravel(), spec.values.imag.ravel()])
    grid = spec.grid
    header = {
        "n_omega_tau": spec.omega_tau.size,
        "n_omega_t": spec.omega_t.size,
        "zero_pad_factor": spec.zero_pad_factor,
        "window": spec.window.value,
        "carrier_mev": float(grid.carrier),
        "waiting_ps": float(grid.waiting),
        "n_tau": grid.tau.size,
        "n_t": grid.t.size,
        "tau_start_ps": float(grid.tau[0]),
        "t_start_ps": float(grid.t[0]),
        "tau_step_ps": grid.tau_step,
        "t_step_ps": grid.t_step,
    }
    write_table(path, "spectrum", header, SPECTRUM_COLUMNS, rows)


def read_spectrum(path: str) -> Spectrum2D:
    table = read_table(path, "spectrum", SPECTRUM_COLUMNS)
    n_a, n_b = table.integer("n_omega_tau"), table.integer("n_omega_t")
    if table.rows.shape[0] != n_a * n_b:
        raise FormatError(f"Expected {n_a * n_b} records, found {table.rows.shape[0]}", path)
    omega_tau = table.column("omega_tau_mev").reshape(n_a, n_b)[:, 0]
    omega_t = table.column("omega_t_mev").reshape(n_a, n_b)[0]
    values = (table.column("real") + 1j * table.column("imag")).reshape(n_a, n_b)
    try:
        window = Window(table.require("window"))
    except ValueError:
        raise FormatError(f"Unknown window '{table.get('window')}'", path, table.header_lines.get("window")) from None
    try:
        grid = ScanGrid(
            tau=table.number("tau_start_ps") + table.number("tau_step_ps") * np.arange(table.integer("n_tau")),
            t=table.number("t_start_ps") + table.number("t_step_ps") * np.arange(table.integer("n_t")),
            waiting=table.number("waiting_ps"),
            carrier=table.number("carrier_mev"),
        )
        return Spectrum2D(
            omega_tau=omega_tau,
            omega_t=omega_t,
            values=values,
            grid=grid,
            zero_pad_factor=table.integer("zero_pad_factor"),
            window=window,
        )
    except MdcsError as error:
        raise FormatError(str(error), path) from error


# Series and plot tables


def write_series(path: str, points: Sequence[SeriesPoint], header: Optional[Mapping[str, object]] = None) -> None:
    with_errors = bool(points) and all(p.y_err is not None for p in points)
    columns = ("x", "y", "y_err") if with_errors else ("x", "y")
    rows = [[p.x, p.y, p.y_err] if with_errors else [p.x, p.y] for p in points]
    write_table(path, "series", dict(header or {}), columns, np.array(rows, dtype=float).reshape(-1, len(columns)))


def read_series(path: str) -> List[SeriesPoint]:
    """Series rows; a file without a ``y_err`` column yields unweighted points."""
    table = read_table(path, "series", ("x", "y"))
    has_errors = "y_err" in table.columns
    points = []
    for index, row in enumerate(table.rows):
        try:
            points.append(
                SeriesPoint(
                    x=float(row[table.columns.index("x")]),
                    y=float(row[table.columns.index("y")]),
                    y_err=float(row[table.columns.index("y_err")]) if has_errors else None,
                )
            )
        except MdcsError as error:
            raise FormatError(str(error), path, table.first_row_line + index) from error
    return points


def write_slice(path: str, profile: SliceProfile) -> None:
    rows = np.column_stack([profile.abscissa, profile.energies, profile.ordinate])
    header = {"anchor_mev": float(profile.anchor), "direction": profile.direction.value}
    write_table(path, "slice", header, SLICE_COLUMNS, rows)


def read_slice(path: str) -> SliceProfile:
    table = read_table(path, "slice", SLICE_COLUMNS)
    try:
        direction = SliceDirection(table.require("direction"))
    except ValueError:
        raise FormatError(
            f"Unknown slice direction '{table.get('direction')}'", path, table.header_lines.get("direction")
        ) from None
    try:
        return SliceProfile(
            abscissa=table.column("offset_mev"),
            ordinate=table.column("magnitude"),
            anchor=table.number("anchor_mev"),
            direction=direction,
        )
    except MdcsError as error:
        raise FormatError(str(error), path, table.first_row_line) from error


def write_plot_table(
    path: str, x: np.ndarray, data: np.ndarray, model: np.ndarray, header: Optional[Mapping[str, object]] = None
) -> None:
    rows = np.column_stack([np.asarray(x, dtype=float), np.asarray(data, dtype=float), np.asarray(model, dtype=float)])
    write_table(path, "plot", dict(header or {}), PLOT_COLUMNS, rows)


def read_plot_table(path: str) -> Table:
    return read_table(path, "plot", PLOT_COLUMNS)


# Models


def write_model(path: str, model: EnsembleModel) -> None:
    header: Dict[str, object] = {
        "gamma_ghz": float(model.gamma),
        "pop_decay_ghz": float(model.pop_decay),
        "diffusion_mhz_per_ps": float(model.diffusion.rate),
    }
    if model.temperature is not None:
        header["temperature_k"] = float(model.temperature)
    if model.thermal is not None:
        header["thermal.gamma0_ghz"] = float(model.thermal.gamma0)
        header["thermal.gamma_star_ghz"] = float(model.thermal.gamma_star)
        header["thermal.e_ph_mev"] = float(model.thermal.e_ph)
    if model.echo_segments is not None:
        header["echo.t2_early_ps"] = float(model.echo_segments.t2_early)
        header["echo.t2_late_ps"] = float(model.echo_segments.t2_late)
        header["echo.crossover_ps"] = float(model.echo_segments.crossover)
    rows = np.array([[c.center, c.sigma, c.weight] for c in model.components], dtype=float)
    write_table(path, "model", header, MODEL_COLUMNS, rows)


def read_model(path: str) -> EnsembleModel:
    table = read_table(path, "model", MODEL_COLUMNS)
    if table.rows.shape[0] == 0:
        raise FormatError("A model needs at least one component row", path)
    try:
        components = tuple(
            Resonance(center=row[0], sigma=row[1], weight=row[2])
            for row in table.rows[:, [table.columns.index(name) for name in MODEL_COLUMNS]]
        )
        thermal = None
        if "thermal.gamma0_ghz" in table.header:
            thermal = ThermalDephasingParams(
                gamma0=table.number("thermal.gamma0_ghz"),
                gamma_star=table.number("thermal.gamma_star_ghz"),
                e_ph=table.number("thermal.e_ph_mev"),
            )
        segments = None
        if "echo.t2_early_ps" in table.header:
            segments = EchoSegments(
                t2_early=table.number("echo.t2_early_ps"),
                t2_late=table.number("echo.t2_late_ps"),
                crossover=table.number("echo.crossover_ps"),
            )
        return EnsembleModel(
            components=components,
            gamma=table.number("gamma_ghz", 0.0),
            thermal=thermal,
            temperature=table.number("temperature_k") if "temperature_k" in table.header else None,
            diffusion=SpectralDiffusionParams(rate=table.number("diffusion_mhz_per_ps", 0.0)),
            pop_decay=table.number("pop_decay_ghz", 0.0),
            echo_segments=segments,
        )
    except FormatError:
        raise
    except MdcsError as error:
        raise FormatError(str(error), path) from error


# Fit results


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def provenance(inputs: Sequence[str], **settings: object) -> Dict[str, str]:
    """Tool version, input hashes and the settings that produced an output."""
    record = {"tool": f"python_nv_mdcs {__version__}"}
    for index, path in enumerate(inputs):
        record[f"input.{index}.path"] = os.path.basename(path)
        record[f"input.{index}.sha256"] = sha256_file(path)
    record.update({key: str(value) for key, value in settings.items()})
    return record


@dataclass
class ParamsFile:
    """Fitted values with uncertainties, units, status and provenance."""

    values: Dict[str, float]
    sigma: Dict[str, float]
    units: Dict[str, str]
    converged: bool
    flags: Tuple[FitFlag, ...]
    provenance: Dict[str, str] = field(default_factory=dict)


def write_params(
    path: str,
    result: FitResult,
    units: Mapping[str, str],
    provenance_record: Optional[Mapping[str, str]] = None,
    extra: Optional[Mapping[str, float]] = None,
) -> None:
    """Flat ``key = value`` file; each parameter has ``.sigma`` and ``.unit`` companions."""
    lines = [f"# format_version = {FORMAT_VERSION}", "# kind = params", "# provenance"]
    lines += [f"#   {key} = {value}" for key, value in (provenance_record or {}).items()]
    lines.append(f"converged = {'true' if result.converged else 'false'}")
    lines.append(f"flags = {';'.join(flag.value for flag in result.flags)}")
    lines.append(f"iterations = {result.iterations}")
    lines.append(f"residual_norm = {_number(result.residual_norm)}")
    for name in result.names:
        lines.append(f"{name} = {_number(result[name])}")
        lines.append(f"{name}.sigma = {_number(result.sigma.get(name, math.nan))}")
        lines.append(f"{name}.unit = {units.get(name, '')}")
    for name, value in (extra or {}).items():
        lines.append(f"{name} = {_number(value)}")
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write("\n".join(lines) + "\n")


_STATUS_KEYS = ("converged", "flags", "iterations", "residual_norm")


def _parse_param(text: str, path: str, line: int) -> float:
    # unresolved fits legitimately report inf or nan
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"Not a number: '{text}'", path, line) from None


def read_params(path: str) -> ParamsFile:
    if not os.path.isfile(path):
        raise FormatError("File not found", path)
    with open(path, "r", encoding="utf-8") as handle:
        text_lines = handle.read().splitlines()
    comments = [(i + 1, line) for i, line in enumerate(text_lines) if line.startswith("#")]
    header, positions = _read_header(path, comments)
    _check_kind(path, header, positions, "params")
    provenance_record = {k: v for k, v in header.items() if k not in ("format_version", "kind")}

    entries: Dict[str, Tuple[str, int]] = {}
    for number, line in enumerate(text_lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if "=" not in line:
            raise FormatError(f"Expected 'key = value', found '{line.strip()}'", path, number)
        key, _, value = line.partition("=")
        entries[key.strip()] = (value.strip(), number)

    converged_text = entries.get("converged", ("", 0))[0]
    if converged_text not in ("true", "false"):
        raise FormatError(f"Invalid converged value '{converged_text}'", path, entries.get("converged", ("", None))[1])
    flag_text = entries.get("flags", ("", 0))[0]
    try:
        flags = tuple(FitFlag(item) for item in flag_text.split(";") if item)
    except ValueError:
        raise FormatError(f"Unknown fit flag in '{flag_text}'", path, entries["flags"][1]) from None

    values: Dict[str, float] = {}
    sigma: Dict[str, float] = {}
    units: Dict[str, str] = {}
    for key, (text, number) in entries.items():
        if key in _STATUS_KEYS:
            continue
        if key.endswith(".unit"):
            units[key[:-5]] = text
        elif key.endswith(".sigma"):
            sigma[key[:-6]] = _parse_param(text, path, number)
        else:
            values[key] = _parse_param(text, path, number)
    return ParamsFile(
        values=values,
        sigma=sigma,
        units=units,
        converged=converged_text == "true",
        flags=flags,
        provenance=provenance_record,
    )
