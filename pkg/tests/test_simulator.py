"""Tests for the rephasing forward model."""

import math

import numpy as np
import pytest

from src.python_nv_mdcs.core.constants import ANGULAR_PER_MEV
from src.python_nv_mdcs.core.errors import DomainError, GridError
from src.python_nv_mdcs.core.physics import SpectralDiffusionParams, ThermalDephasingParams
from src.python_nv_mdcs.core.simulator import (
    EchoSegments,
    EnsembleModel,
    Resonance,
    ScanGrid,
    TimeDomainScan,
    echo_envelope,
    gamma_for_conditions,
    integrated_fwm,
    rephasing_response,
    simulate_scan,
)


class TestEnsembleModel:
    """Test suite for the ensemble description."""

    def test_weights_are_normalised(self):
        """Test weights sum to one and set the mean center."""
        model = EnsembleModel(components=(Resonance(1940.0, weight=1.0), Resonance(1950.0, weight=3.0)))

        np.testing.assert_allclose(model.weights, [0.25, 0.75])
        assert model.mean_center == pytest.approx(1947.5)

    def test_thermal_model_needs_temperature(self, thermal_params):
        """Test a thermal model without a temperature is rejected."""
        with pytest.raises(DomainError):
            EnsembleModel(components=(Resonance(1945.0),), thermal=thermal_params)

    def test_homogeneous_rate_from_thermal_model(self, thermal_params):
        """Test the thermal model overrides the fixed gamma."""
        model = EnsembleModel(components=(Resonance(1945.0),), gamma=1.0, thermal=thermal_params, temperature=120.0)

        assert model.homogeneous_rate() == pytest.approx(330.9, rel=1e-3)
        assert model.homogeneous_rate(0.0) == 37.31

    def test_invalid_components(self):
        """Test empty or weightless ensembles are rejected."""
        with pytest.raises(DomainError):
            EnsembleModel(components=())
        with pytest.raises(DomainError):
            EnsembleModel(components=(Resonance(1945.0, weight=0.0),))
        with pytest.raises(DomainError):
            Resonance(1945.0, sigma=-0.1)


class TestScanGrid:
    """Test suite for the delay grid."""

    def test_uniform_grid(self):
        """Test the uniform constructor."""
        grid = ScanGrid.uniform(16, 8, 0.05, waiting=10.0)

        assert grid.shape == (16, 8)
        assert grid.tau_step == pytest.approx(0.05)
        assert grid.waiting == 10.0
        assert grid.carrier is None

    def test_too_few_samples(self):
        """Test axes shorter than 8 samples are rejected."""
        with pytest.raises(GridError):
            ScanGrid.uniform(4, 16, 0.05)

    def test_non_uniform_axis(self):
        """Test irregular sampling is rejected."""
        tau = np.concatenate([np.arange(8) * 0.1, [0.95]])
        with pytest.raises(GridError):
            ScanGrid(tau=tau, t=np.arange(9) * 0.1)

    def test_negative_delay(self):
        """Test axes must start at a non-negative delay."""
        with pytest.raises(GridError):
            ScanGrid(tau=np.arange(-1, 8) * 0.1, t=np.arange(9) * 0.1)

    def test_scan_shape_must_match(self, small_grid):
        """Test values are checked against the grid."""
        with pytest.raises(GridError):
            TimeDomainScan(grid=small_grid.with_carrier(1945.0), values=np.zeros((4, 4)))


class TestRephasingResponse:
    """Test suite for the single-point kernel."""

    def test_unit_amplitude_at_origin(self, single_model):
        """Test the response is the total weight at zero delays."""
        assert abs(rephasing_response(single_model, 0.0, 0.0, 0.0)) == pytest.approx(1.0)

    def test_echo_amplitude_is_independent_of_sigma(self):
        """Test inhomogeneous dephasing cancels on the echo t = tau."""
        narrow = EnsembleModel(components=(Resonance(1945.0, sigma=0.1),), gamma=37.31)
        wide = EnsembleModel(components=(Resonance(1945.0, sigma=2.6),), gamma=37.31)
        expected = math.exp(-2 * 37.31e-3 * 5.0)

        assert abs(rephasing_response(narrow, 5.0, 0.0, 5.0)) == pytest.approx(expected, rel=1e-12)
        assert abs(rephasing_response(wide, 5.0, 0.0, 5.0)) == pytest.approx(expected, rel=1e-12)

    def test_phase_uses_absolute_energy(self):
        """Test the phase is omega * (tau - t) with the carrier at zero."""
        model = EnsembleModel(components=(Resonance(2.0),))
        value = rephasing_response(model, 1.0, 0.0, 0.0)

        assert np.angle(value) == pytest.approx(math.remainder(ANGULAR_PER_MEV * 2.0, 2 * math.pi))

    def test_population_decay_and_diffusion(self):
        """Test waiting-time factors."""
        model = EnsembleModel(
            components=(Resonance(1945.0),),
            gamma=10.0,
            pop_decay=5.0,
            diffusion=SpectralDiffusionParams(rate=2.0),
        )
        value = abs(rephasing_response(model, 1.0, 100.0, 1.0))
        gamma = 10.0 + 2.0 * 100.0 / 1000.0

        assert value == pytest.approx(math.exp(-2 * gamma * 1e-3) * math.exp(-5.0 * 1e-3 * 100.0), rel=1e-12)

    def test_negative_delay_rejected(self, single_model):
        """Test delays must be non-negative."""
        with pytest.raises(DomainError):
            rephasing_response(single_model, -1.0, 0.0, 0.0)

    def test_gamma_for_conditions(self, thermal_params):
        """Test thermal and diffusion contributions combine."""
        model = EnsembleModel(
            components=(Resonance(1945.0),),
            thermal=thermal_params,
            temperature=5.0,
            diffusion=SpectralDiffusionParams(rate=1.98),
        )

        assert gamma_for_conditions(model, 15.0, 1000.0) == pytest.approx(37.31 + 1.98, abs=1e-6)


class TestSimulateScan:
    """Test suite for grid simulation."""

    def test_default_carrier_is_mean_center(self, single_model, small_grid):
        """Test the scan is recorded in the frame of the ensemble mean."""
        scan = simulate_scan(single_model, small_grid)

        assert scan.carrier == 1945.0
        assert scan.values.shape == (32, 32)
        assert scan.metadata["n_components"] == 1
        assert scan.metadata["gamma_ghz"] == 100.0

    def test_grid_matches_point_kernel(self, single_model, small_grid):
        """Test the vectorised grid agrees with the point evaluation."""
        grid = small_grid.with_carrier(1944.0)
        scan = simulate_scan(single_model, grid)
        i, j = 7, 19
        expected = rephasing_response(single_model, grid.tau[i], 0.0, grid.t[j], carrier=1944.0)

        assert scan.values[i, j] == pytest.approx(expected, rel=1e-12)

    def test_mixture_linearity(self, small_grid):
        """Test a mixture is the weighted sum of its components."""
        a = Resonance(1943.0, sigma=2.6)
        b = Resonance(1948.0, sigma=2.3)
        grid = small_grid.with_carrier(1945.0)
        mixture = simulate_scan(EnsembleModel(components=(a, b), gamma=50.0), grid).values
        alone_a = simulate_scan(EnsembleModel(components=(a,), gamma=50.0), grid).values
        alone_b = simulate_scan(EnsembleModel(components=(b,), gamma=50.0), grid).values

        np.testing.assert_allclose(mixture, 0.5 * alone_a + 0.5 * alone_b, rtol=1e-12, atol=1e-15)

    def test_two_components_beat_along_t(self, two_component_model):
        """Test interference between two lines 5 meV apart."""
        node = math.pi / (ANGULAR_PER_MEV * 5.0)
        grid = ScanGrid(tau=np.arange(8) * node, t=np.arange(8) * node)
        scan = simulate_scan(two_component_model, grid)

        assert abs(scan.values[0, 0]) == pytest.approx(1.0)
        assert abs(scan.values[0, 1]) < 1e-12
        assert abs(scan.values[0, 2]) == pytest.approx(1.0)

    def test_deterministic(self, single_model, small_grid):
        """Test repeated simulation is bit identical."""
        first = simulate_scan(single_model, small_grid).values
        second = simulate_scan(single_model, small_grid).values

        assert np.array_equal(first, second)

    def test_echo_maximum_on_tau(self):
        """Test |response| along t peaks at t = tau for every tau row."""
        model = EnsembleModel(components=(Resonance(1945.0, sigma=2.6),), gamma=37.31)
        scan = simulate_scan(model, ScanGrid.uniform(64, 64, 0.05))

        assert np.array_equal(np.argmax(np.abs(scan.values), axis=1), np.arange(64))

    def test_conjugate_symmetry(self):
        """Test negating every center conjugates the response."""
        components = (Resonance(1944.0, sigma=2.6, weight=0.7), Resonance(1949.0, sigma=2.3, weight=0.3))
        model = EnsembleModel(components=components, gamma=37.31)
        mirrored = EnsembleModel(
            components=tuple(Resonance(-c.center, sigma=c.sigma, weight=c.weight) for c in components), gamma=37.31
        )

        for tau, t in [(0.3, 0.7), (2.0, 2.0), (5.0, 1.25)]:
            original = rephasing_response(model, tau, 0.0, t)
            assert rephasing_response(mirrored, tau, 0.0, t) == pytest.approx(original.conjugate(), abs=1e-14)

    def test_underflow_is_zeroed(self, small_grid):
        """Test vanishing amplitudes are stored as exact zeros."""
        model = EnsembleModel(components=(Resonance(1945.0),), gamma=7e5)
        scan = simulate_scan(model, small_grid)

        assert scan.values[0, 0] == 1.0
        assert scan.values[2, 2] != 0
        assert np.all(scan.values[5:, 5:] == 0)


class TestIntegratedFwm:
    """Test suite for the time-integrated echo."""

    def test_decay_constant(self):
        """Test the field decays as exp(-2 gamma tau)."""
        model = EnsembleModel(components=(Resonance(1945.0, sigma=2.6),), gamma=37.31)
        fields = integrated_fwm(model, [0.0, 13.40])

        assert fields[1] / fields[0] == pytest.approx(math.exp(-1.0), rel=1e-3)

    def test_monotone(self, single_model):
        """Test the trace decreases strictly."""
        fields = integrated_fwm(single_model, np.arange(0.0, 40.0, 0.5))

        assert np.all(fields > 0)
        assert np.all(np.diff(fields) < 0)

    def test_lossless_trace_is_constant(self):
        """Test gamma = 0 and sigma = 0 give a flat trace equal to the full gate width."""
        model = EnsembleModel(components=(Resonance(1945.0),), gamma=0.0)
        fields = integrated_fwm(model, np.arange(0.0, 40.0, 2.0))

        np.testing.assert_allclose(fields, fields[0], rtol=1e-12)
        assert fields[0] == pytest.approx(10.0, rel=1e-9)

    def test_segmented_envelope_is_continuous(self):
        """Test the two-stage decay joins at the crossover."""
        segments = EchoSegments(t2_early=26.8, t2_late=14.4, crossover=10.0)
        model = EnsembleModel(components=(Resonance(1945.0, sigma=2.6),), gamma=37.31, echo_segments=segments)
        left, right = echo_envelope(model, [10.0 - 1e-9, 10.0])

        assert left == pytest.approx(right, rel=1e-9)
        assert echo_envelope(model, [20.0])[0] == pytest.approx(math.exp(-20.0 / 26.8 - 20.0 / 14.4))

    def test_invalid_samples(self, single_model):
        """Test empty and negative delay lists are rejected."""
        with pytest.raises(DomainError):
            integrated_fwm(single_model, [])
        with pytest.raises(DomainError):
            integrated_fwm(single_model, [-1.0])
        with pytest.raises(DomainError):
            EchoSegments(t2_early=0.0, t2_late=1.0, crossover=1.0)
