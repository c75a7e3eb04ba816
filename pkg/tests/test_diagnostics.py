import numpy as np
import pytest

from conftest import random_discrete
from probeval import (
    DiscreteForecast,
    calibration_report,
    coverage,
    dispersion,
    generate_self_calibrated_batch,
    sharpness,
)
from probeval.errors import EmptyBatchError, InvalidLevelError


def forecast_with_std(s):
    return DiscreteForecast([-s, s], [0.5, 0.5])


class TestSharpness:
    def test_arithmetic_mean_of_stds(self):
        assert sharpness([forecast_with_std(1.0), forecast_with_std(3.0)]) == pytest.approx(2.0)

    def test_point_masses(self):
        assert sharpness([DiscreteForecast([1.0], [1.0])] * 3) == 0.0

    def test_single_forecast(self):
        assert sharpness([forecast_with_std(2.5)]) == pytest.approx(2.5)

    def test_empty_batch(self):
        with pytest.raises(EmptyBatchError):
            sharpness([])


class TestDispersion:
    def test_population_std_of_two(self):
        assert dispersion([forecast_with_std(1.0), forecast_with_std(3.0)]) == pytest.approx(1.0)

    def test_identical_forecasts(self):
        assert dispersion([forecast_with_std(2.0)] * 4) == 0.0

    def test_single_forecast_well_defined(self):
        assert dispersion([forecast_with_std(1.0)]) == 0.0

    def test_bounded_by_std_range(self):
        rng = np.random.default_rng(17)
        stds = rng.uniform(0.5, 4.0, size=20)
        batch = [forecast_with_std(s) for s in stds]
        assert dispersion(batch) <= stds.max() - stds.min() + 1e-12


class TestCoverage:
    def test_all_inside(self):
        batch = [(forecast_with_std(1.0), 0.0)] * 5
        assert coverage(batch, 0.9) == 1.0

    def test_all_outside(self):
        batch = [(forecast_with_std(1.0), 100.0)] * 5
        assert coverage(batch, 0.9) == 0.0

    def test_invalid_level(self):
        batch = [(forecast_with_std(1.0), 0.0)]
        with pytest.raises(InvalidLevelError):
            coverage(batch, 1.0)

    def test_empty_batch(self):
        with pytest.raises(EmptyBatchError):
            coverage([], 0.9)

    def test_monotone_in_level(self):
        rng = np.random.default_rng(23)
        batch = [
            (random_discrete(rng, max_support=10), float(rng.normal()))
            for _ in range(100)
        ]
        levels = (0.5, 0.7, 0.9, 0.95, 0.99)
        values = [coverage(batch, lv) for lv in levels]
        assert all(a <= b for a, b in zip(values, values[1:]))

    def test_self_calibrated_batch_covers_at_least_nominal(self):
        batch = generate_self_calibrated_batch(1000, seed=4)
        assert coverage(batch, 0.90) >= 0.89
        assert coverage(batch, 0.95) >= 0.94


class TestEquivariance:
    def test_translation_invariance_and_scale_equivariance(self):
        rng = np.random.default_rng(29)
        batch = [random_discrete(rng, max_support=8) for _ in range(10)]
        base_sharp, base_disp = sharpness(batch), dispersion(batch)

        shifted = [DiscreteForecast(f.points + 7.0, f.probs) for f in batch]
        assert sharpness(shifted) == pytest.approx(base_sharp, rel=1e-12)
        assert dispersion(shifted) == pytest.approx(base_disp, rel=1e-12)

        scaled = [DiscreteForecast(f.points * 3.0, f.probs) for f in batch]
        assert sharpness(scaled) == pytest.approx(3.0 * base_sharp, rel=1e-12)
        assert dispersion(scaled) == pytest.approx(3.0 * base_disp, rel=1e-12)


class TestCalibrationReport:
    def test_report_fields(self):
        batch = [(forecast_with_std(1.0), 0.0), (forecast_with_std(3.0), 50.0)]
        report = calibration_report(batch)
        assert report.sharpness == pytest.approx(2.0)
        assert report.dispersion == pytest.approx(1.0)
        assert report.coverage[0.90] == 0.5
        assert report.coverage[0.95] == 0.5
        assert all(0.0 <= v <= 1.0 for v in report.coverage.values())
