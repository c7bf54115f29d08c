"""End-to-end tests of the nv-mdcs command line."""

import numpy as np
import pytest

from src.python_nv_mdcs.business import fileio
from src.python_nv_mdcs.business.cli import EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_OK, main, plot_path
from src.python_nv_mdcs.business.fitting import SeriesPoint
from src.python_nv_mdcs.core.enums import SliceDirection
from src.python_nv_mdcs.core.physics import StarkParams, field_from_splitting, thermal_dephasing_rate
from src.python_nv_mdcs.core.simulator import EchoSegments, EnsembleModel, Resonance
from src.python_nv_mdcs.core.spectra import SliceProfile


@pytest.fixture
def model_file(tmp_path, thermal_params):
    """Thermal ensemble model at the zero-phonon line."""
    path = str(tmp_path / "model.csv")
    model = EnsembleModel(
        components=(Resonance(1945.0, sigma=2.6),),
        thermal=thermal_params,
        temperature=120.0,
        echo_segments=EchoSegments(t2_early=26.8, t2_late=14.4, crossover=10.0),
    )
    fileio.write_model(path, model)
    return path


@pytest.mark.integration
class TestCli:
    """Integration tests for the sub-commands."""

    def test_missing_model_file(self, tmp_path):
        """Test a missing --config path exits with 2."""
        code = main(["simulate", "--config", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "scan.csv")])

        assert code == EXIT_INVALID

    def test_missing_input_argument(self, tmp_path):
        """Test a fit without --in exits with 2."""
        assert main(["fit-temperature", "--out", str(tmp_path / "params.txt")]) == EXIT_INVALID

    def test_unknown_command(self):
        """Test argparse rejects unknown sub-commands."""
        with pytest.raises(SystemExit) as excinfo:
            main(["transmogrify"])

        assert excinfo.value.code == 2

    def test_field_conversion(self, capsys):
        """Test the splitting to field conversion is printed."""
        assert main(["field", "--splitting", "5"]) == EXIT_OK

        printed = capsys.readouterr().out.strip()
        assert printed.startswith("field = ")
        assert printed.endswith(" MV/cm")
        assert float(printed.split()[2]) == pytest.approx(field_from_splitting(5.0, StarkParams()), rel=1e-5)

    def test_splitting_conversion(self, capsys):
        """Test the inverse conversion with a custom polarizability."""
        assert main(["field", "--field", "0.29", "--chi-perp", "1.4"]) == EXIT_OK

        printed = capsys.readouterr().out.split()
        assert printed[:2] == ["splitting", "="]
        assert float(printed[2]) == pytest.approx(3.358, rel=1e-3)

    def test_fit_temperature(self, tmp_path, thermal_params, thermal_series_x):
        """Test the thermal fit writes parameters and a plot table."""
        series = str(tmp_path / "series.csv")
        rates = thermal_dephasing_rate(thermal_params, thermal_series_x)
        fileio.write_series(series, [SeriesPoint(float(t), float(r)) for t, r in zip(thermal_series_x, rates)])
        out = str(tmp_path / "thermal.txt")

        assert main(["fit-temperature", "--in", series, "--out", out]) == EXIT_OK

        params = fileio.read_params(out)
        assert params.converged
        assert params.values["gamma0"] == pytest.approx(37.31, rel=1e-2)
        assert params.units["e_ph"] == "meV"
        assert params.provenance["input.0.sha256"] == fileio.sha256_file(series)
        plot = fileio.read_plot_table(plot_path(out))
        np.testing.assert_allclose(plot.column("model"), rates, rtol=1e-4)

    def test_rerun_is_byte_identical(self, tmp_path, thermal_params, thermal_series_x):
        """Test running the same fit twice to the same output leaves identical bytes."""
        series = str(tmp_path / "series.csv")
        rates = thermal_dephasing_rate(thermal_params, thermal_series_x)
        fileio.write_series(series, [SeriesPoint(float(t), float(r)) for t, r in zip(thermal_series_x, rates)])
        out = str(tmp_path / "thermal.txt")
        digests = []
        for _ in range(2):
            assert main(["fit-temperature", "--in", series, "--out", out]) == EXIT_OK
            digests.append((fileio.sha256_file(out), fileio.sha256_file(plot_path(out))))

        assert digests[0] == digests[1]

    def test_fit_diffusion(self, tmp_path):
        """Test the diffusion rate comes back in MHz/ps."""
        series = str(tmp_path / "series.csv")
        fileio.write_series(series, [SeriesPoint(w, 37.31 + 1.98e-3 * w) for w in (1.0, 500.0, 1000.0, 2000.0)])
        out = str(tmp_path / "diffusion.txt")

        assert main(["fit-diffusion", "--in", series, "--out", out]) == EXIT_OK
        assert fileio.read_params(out).values["rate"] == pytest.approx(1.98, rel=1e-9)

    def test_fit_bimodal(self, tmp_path):
        """Test ordered centers and the derived field."""
        offsets = np.arange(0.0, 40.0, 0.05)
        energies = 1926.5 + offsets
        ordinate = np.exp(-0.5 * ((energies - 1944.0) / 2.6) ** 2)
        ordinate += 0.8 * np.exp(-0.5 * ((energies - 1949.0) / 2.3) ** 2)
        slice_file = str(tmp_path / "diagonal.csv")
        fileio.write_slice(slice_file, SliceProfile(offsets, ordinate, 1926.5, SliceDirection.DIAGONAL))
        out = str(tmp_path / "bimodal.txt")

        code = main(["fit-bimodal", "--in", slice_file, "--out", out, "--sigma1", "2.6", "--sigma2", "2.3"])

        values = fileio.read_params(out).values
        assert code == EXIT_OK
        assert values["omega1"] < values["omega2"]
        assert values["splitting"] == pytest.approx(5.0, abs=0.1)
        assert values["field"] == pytest.approx(field_from_splitting(values["splitting"], StarkParams()))

    def test_fwm_then_fit_echo(self, tmp_path, model_file):
        """Test the integrated trace of a two-stage model is segmented again."""
        trace = str(tmp_path / "fwm.csv")
        out = str(tmp_path / "echo.txt")

        assert main(["fwm", "--config", model_file, "--out", trace]) == EXIT_OK
        assert len(fileio.read_series(trace)) == 81
        assert main(["fit-echo", "--in", trace, "--out", out]) == EXIT_OK

        values = fileio.read_params(out).values
        assert values["t2_early"] == pytest.approx(26.8, rel=0.05)
        assert values["t2_late"] == pytest.approx(14.4, rel=0.05)
        assert values["difference"] > 10.0

    def test_non_converged_fit_exits_with_one(self, tmp_path):
        """Test a flat trace is written but flagged."""
        trace = str(tmp_path / "flat.csv")
        fileio.write_series(trace, [SeriesPoint(float(tau), 1.0) for tau in range(20)])
        out = str(tmp_path / "echo.txt")

        assert main(["fit-echo", "--in", trace, "--out", out]) == EXIT_NOT_CONVERGED

        params = fileio.read_params(out)
        assert not params.converged
        assert params.flags

    def test_seeded_noise_is_reproducible(self, tmp_path, model_file):
        """Test the same seed gives byte-identical scans."""
        digests = []
        for name, seed in (("a", "7"), ("b", "7"), ("c", "8")):
            out = str(tmp_path / f"{name}.csv")
            args = ["simulate", "--config", model_file, "--out", out, "--samples", "16", "--step", "0.1"]
            assert main(args + ["--noise", "0.01", "--seed", seed]) == EXIT_OK
            digests.append(fileio.sha256_file(out))

        assert digests[0] == digests[1]
        assert digests[0] != digests[2]

    def test_log_file(self, tmp_path, model_file):
        """Test --log-file receives the run log."""
        log_file = tmp_path / "logs" / "run.log"
        out = str(tmp_path / "scan.csv")
        args = ["simulate", "--config", model_file, "--out", out, "--samples", "16", "--log-file", str(log_file)]

        assert main(args) == EXIT_OK
        assert "Wrote" in log_file.read_text()

    @pytest.mark.slow
    def test_full_pipeline(self, tmp_path, model_file):
        """Test simulate, spectrum, slice and slice fit at 120 K."""
        scan = str(tmp_path / "scan.csv")
        spectrum = str(tmp_path / "spectrum.csv")
        diagonal = str(tmp_path / "diagonal.csv")
        out = str(tmp_path / "lineshape.txt")
        series = str(tmp_path / "gamma_vs_t.csv")

        assert main(["simulate", "--config", model_file, "--out", scan]) == EXIT_OK
        assert main(["spectrum", "--in", scan, "--out", spectrum]) == EXIT_OK
        assert main(["slice", "--in", spectrum, "--out", diagonal, "--range", "1935", "1955"]) == EXIT_OK
        assert fileio.read_slice(diagonal).peak_position() == pytest.approx(1945.0, abs=0.2)
        code = main(
            ["fit-slices", "--in", spectrum, "--out", out, "--anchor", "1945", "--append-series", series, "--x", "120"]
        )

        params = fileio.read_params(out)
        assert code == EXIT_OK
        assert params.values["gamma"] == pytest.approx(330.9, rel=0.03)
        assert params.values["sigma"] == pytest.approx(2.6, rel=0.02)
        assert fileio.read_series(series)[0].x == 120.0
        assert fileio.read_plot_table(plot_path(out, "_cross")).rows.shape[0] > 5
