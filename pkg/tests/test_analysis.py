import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvpnp.analysis import (
    REFERENCE_14KM,
    REFERENCE_20M,
    amplitude_from_photons,
    comparison_error,
    fit_cosine,
    photons_from_amplitude,
    reproducibility,
)
from cvpnp.errors import InsufficientData, InvalidArgument, ShapeError

PHASES = 2 * np.pi * np.arange(17) / 17


class TestFitCosine:
    @given(a=st.floats(0.01, 10), phi0=st.floats(-3, 3), c=st.floats(-2, 2))
    def test_exact_recovery(self, a, phi0, c):
        fit = fit_cosine(PHASES, a * np.cos(PHASES - phi0) + c)
        assert fit.amplitude == pytest.approx(a, rel=1e-9)
        assert fit.offset == pytest.approx(c, abs=1e-9)
        assert math.cos(fit.phase_offset - phi0) == pytest.approx(1.0, abs=1e-9)
        assert fit.rms_residual < 1e-9

    def test_callable(self):
        fit = fit_cosine(PHASES, 2 * np.cos(PHASES) + 0.5)
        assert fit(0.0) == pytest.approx(2.5)

    def test_noisy_amplitude_stderr_is_honest(self):
        rng = np.random.default_rng(1)
        sigma = 0.05
        pulls = []
        for _ in range(400):
            y = 2.0 * np.cos(PHASES - 0.3) + rng.normal(0, sigma, PHASES.size)
            fit = fit_cosine(PHASES, y, sigma=np.full(PHASES.size, sigma))
            pulls.append((fit.amplitude - 2.0) / fit.amplitude_stderr)
        assert abs(np.mean(pulls)) < 0.2
        assert np.std(pulls) == pytest.approx(1.0, abs=0.1)

    def test_zero_amplitude(self):
        fit = fit_cosine(PHASES, np.full(17, 0.3), sigma=np.full(17, 0.1))
        assert fit.amplitude == pytest.approx(0.0, abs=1e-12)
        assert fit.amplitude_stderr > 0

    def test_insufficient_points(self):
        with pytest.raises(InsufficientData):
            fit_cosine([0, 1, 2], [1, 0, -1])

    def test_insufficient_coverage(self):
        phases = np.linspace(0, 2.5, 10)
        with pytest.raises(InsufficientData):
            fit_cosine(phases, np.cos(phases))

    def test_shape(self):
        with pytest.raises(ShapeError):
            fit_cosine(PHASES, PHASES[:-1])


class TestPhotons:
    def test_examples(self):
        assert amplitude_from_photons(4.0) == pytest.approx(math.sqrt(8))
        assert photons_from_amplitude(6.48) == pytest.approx(21.0, abs=0.01)
        assert photons_from_amplitude(0.0) == 0.0

    @given(st.floats(0, 1e6))
    def test_roundtrip(self, n):
        assert photons_from_amplitude(amplitude_from_photons(n)) == pytest.approx(n, rel=1e-12, abs=1e-300)

    def test_negative(self):
        with pytest.raises(InvalidArgument):
            photons_from_amplitude(-1.0)


class TestComparisonError:
    @pytest.mark.parametrize("row", REFERENCE_20M + REFERENCE_14KM)
    def test_reference_rows(self, row):
        n_std, n_hom, quoted = row
        assert comparison_error(n_std, n_hom) == pytest.approx(quoted, abs=0.1)

    def test_row_count(self):
        assert len(REFERENCE_20M) == len(REFERENCE_14KM) == 8

    @given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6), st.floats(1e-3, 1e3))
    def test_symmetric_and_scale_invariant(self, a, b, k):
        e = comparison_error(a, b)
        assert e == pytest.approx(comparison_error(b, a))
        assert e == pytest.approx(comparison_error(k * a, k * b), rel=1e-9, abs=1e-9)
        assert 0 <= e <= 200

    def test_both_zero(self):
        with pytest.raises(InvalidArgument):
            comparison_error(0.0, 0.0)

    def test_vectorized(self):
        assert comparison_error([1, 2], [1, 2]).tolist() == [0.0, 0.0]


class TestReproducibility:
    def test_identical_runs(self):
        assert reproducibility(np.ones((5, 17))) == 0.0

    def test_iid_recovers_sigma(self):
        rng = np.random.default_rng(3)
        v = rng.normal(4.0, 0.02, size=(5, 5000))
        assert reproducibility(v) == pytest.approx(0.02 * 0.94, rel=0.03)

    def test_known_value(self):
        assert reproducibility([[1.0, 0.0], [3.0, 0.0]]) == pytest.approx(math.sqrt(2) / 2)

    def test_one_run(self):
        with pytest.raises(InsufficientData):
            reproducibility([[1.0, 2.0]])

    def test_ragged(self):
        with pytest.raises(ShapeError):
            reproducibility([[1.0, 2.0], [1.0]])
