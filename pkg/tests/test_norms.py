import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevrey.errors import ConfigError, DiagnosticUnavailable
from gevrey.lattice import Lattice, SpectralField, random_field
from gevrey.norms import (
    GevreyIndex,
    TripleNormParams,
    fit_analyticity_radius,
    gevrey_norm,
    modulus_spectrum,
    sobolev_norm,
    triple_norm,
)


def pair(lat, n, vec):
    m = tuple(-x for x in n)
    return SpectralField.from_modes(lat, {n: vec, m: np.conj(vec)})


UNIT = np.array([0.0, 1.0, 0.0])


class TestSobolev:
    def test_zero(self):
        assert sobolev_norm(SpectralField.zeros(Lattice(2)), 1.7) == 0.0

    @pytest.mark.parametrize("q", [0.0, 0.5, 1.0, 2.5])
    def test_unit_shell(self, q):
        assert sobolev_norm(pair(Lattice(2), (1, 0, 0), UNIT), q) == pytest.approx(math.sqrt(2), rel=1e-15)

    def test_second_shell(self):
        assert sobolev_norm(pair(Lattice(2), (2, 0, 0), UNIT), 1.0) == pytest.approx(2 * math.sqrt(2), rel=1e-15)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), q1=st.floats(0, 2), dq=st.floats(0, 2))
    def test_monotone_in_q(self, seed, q1, dq):
        f = random_field(Lattice(3), np.random.default_rng(seed))
        assert sobolev_norm(f, q1) <= sobolev_norm(f, q1 + dq) * (1 + 1e-15)


class TestGevrey:
    def test_sigma_zero_is_sobolev(self):
        f = random_field(Lattice(3), np.random.default_rng(2))
        for q in (0.0, 0.5, 2.0):
            assert gevrey_norm(f, GevreyIndex(0.0, q)) == sobolev_norm(f, q)

    def test_single_shell(self):
        f = pair(Lattice(2), (1, 0, 0), UNIT)
        assert gevrey_norm(f, (1.0, 0.0)) == pytest.approx(math.sqrt(2) * math.e, rel=1e-15)
        assert gevrey_norm(f, (1.0, 0.0)) == pytest.approx(3.84423, abs=1e-5)

    def test_negative_sigma_rejected(self):
        with pytest.raises(ConfigError):
            GevreyIndex(-0.1, 0.0)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), s1=st.floats(0, 3), ds=st.floats(0, 3))
    def test_monotone_in_sigma(self, seed, s1, ds):
        f = random_field(Lattice(3), np.random.default_rng(seed))
        assert gevrey_norm(f, (s1, 0.5)) <= gevrey_norm(f, (s1 + ds, 0.5)) * (1 + 1e-15)

    def test_large_sigma_log_path(self):
        lat = Lattice(4)
        f = random_field(lat, np.random.default_rng(4), decay=1.0)
        sigma = 60.0  # beyond the direct-evaluation switch
        k = lat.knorm[lat.retained]
        m2 = np.sum(np.abs(f.coeffs) ** 2, axis=0)[lat.retained]
        want = math.sqrt(math.fsum((m2 * np.exp(2 * sigma * k - 2 * sigma * 4 * math.sqrt(3)) * k).tolist()))
        want *= math.exp(sigma * 4 * math.sqrt(3))
        assert gevrey_norm(f, (sigma, 0.5)) == pytest.approx(want, rel=1e-12)
        assert gevrey_norm(f, (400.0, 0.0)) == math.inf


class TestTriple:
    def test_zero(self):
        assert triple_norm(SpectralField.zeros(Lattice(1)), (1.0, 1.0)) == 0.0

    def test_unit_shell(self):
        assert triple_norm(pair(Lattice(2), (1, 0, 0), UNIT), TripleNormParams(1.0, 1.0)) == pytest.approx(2.0, rel=1e-15)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), alpha=st.floats(0.1, 3), s=st.floats(0.1, 1.5))
    def test_identity(self, seed, alpha, s):
        f = random_field(Lattice(3), np.random.default_rng(seed))
        lhs = triple_norm(f, (alpha, s)) ** 2
        rhs = sobolev_norm(f, 0.5) ** 2 + alpha**2 * sobolev_norm(f, s + 0.5) ** 2
        assert lhs == pytest.approx(rhs, rel=1e-13)

    @pytest.mark.parametrize("a,s", [(0.0, 1.0), (1.0, 0.0), (-1.0, 0.5)])
    def test_invalid(self, a, s):
        with pytest.raises(ConfigError):
            TripleNormParams(a, s)


class TestModulusSpectrum:
    def test_all_ones(self):
        lat = Lattice(2)
        f = random_field(lat, np.random.default_rng(0), unit_direction=True)
        spec = modulus_spectrum(f, 0.0)
        np.testing.assert_allclose(spec.coeffs[lat.retained], 1.0, rtol=1e-15)
        assert spec.coeff((0, 0, 0)) == 0

    def test_preserves_l2(self):
        f = random_field(Lattice(3), np.random.default_rng(1))
        spec = modulus_spectrum(f, 0.0)
        assert math.sqrt(np.sum(np.abs(spec.coeffs) ** 2)) == pytest.approx(sobolev_norm(f, 0.0), rel=1e-14)

    def test_power(self):
        spec = modulus_spectrum(pair(Lattice(2), (2, 0, 0), UNIT), 1.0)
        assert spec.coeff((2, 0, 0)) == pytest.approx(2.0)
        assert spec.coeff((-2, 0, 0)) == pytest.approx(2.0)


class TestRadiusFit:
    @pytest.mark.parametrize("sigma,tol", [(0.5, 0.025), (2.0, 0.1)])
    def test_exponential_decay(self, sigma, tol):
        lat = Lattice(16)
        f = random_field(lat, np.random.default_rng(9), decay=sigma, unit_direction=True)
        fit = fit_analyticity_radius(f)
        assert abs(fit.sigma_hat - sigma) <= tol
        assert fit.r2 > 0.999

    def test_flat_spectrum(self):
        f = random_field(Lattice(8), np.random.default_rng(2), unit_direction=True)
        assert abs(fit_analyticity_radius(f).sigma_hat) < 1e-10

    def test_too_few_shells(self):
        f = pair(Lattice(4), (1, 0, 0), UNIT)
        with pytest.raises(DiagnosticUnavailable):
            fit_analyticity_radius(f)
