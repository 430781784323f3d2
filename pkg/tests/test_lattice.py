import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gevrey.errors import ConfigError
from gevrey.harness import ICSpec, make_ic
from gevrey.lattice import (
    Lattice,
    ScalarSpectralField,
    SpectralField,
    divergence_defect,
    enforce_hermitian,
    enumerate_modes,
    hermitian_defect,
    nonlinear_term,
    project_solenoidal,
    random_field,
)

from oracles import brute_nonlinear


def rel_err(a, b):
    return np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)


class TestEnumerateModes:
    @pytest.mark.parametrize("N,count", [(1, 26), (2, 124), (3, 342)])
    def test_counts(self, N, count):
        assert enumerate_modes(N).shape == (count, 3)

    def test_lexicographic_and_symmetric(self):
        m = enumerate_modes(2)
        keys = [tuple(x) for x in m]
        assert keys == sorted(keys)
        assert set(keys) == {tuple(-np.array(k)) for k in keys}
        assert (0, 0, 0) not in keys

    @pytest.mark.parametrize("bad", [0, -1, 1.5])
    def test_invalid(self, bad):
        with pytest.raises(ConfigError):
            enumerate_modes(bad)
        with pytest.raises(ConfigError):
            Lattice(bad)

    def test_index_roundtrip(self):
        lat = Lattice(3)
        for n in lat.modes():
            idx = lat.index(n)
            assert tuple(lat.wavevectors[(slice(None),) + idx]) == tuple(float(x) for x in n)
        with pytest.raises(ConfigError):
            lat.index((4, 0, 0))


class TestSpectralField:
    def test_immutable_and_copied(self):
        lat = Lattice(1)
        arr = np.ones((3,) + lat.shape, dtype=complex)
        f = SpectralField(lat, arr)
        arr[:] = 5.0
        assert f.coeff((1, 0, 0))[0] == 1.0
        assert np.all(f.coeffs[:, 1, 1, 1] == 0)
        with pytest.raises(AttributeError):
            f.coeffs = arr
        with pytest.raises(ValueError):
            f.coeffs[0, 0, 0, 0] = 1.0

    def test_shape_checked(self):
        with pytest.raises(ConfigError):
            SpectralField(Lattice(2), np.zeros((3, 3, 3, 3)))

    def test_to_physical_matches_trig_series(self):
        lat = Lattice(2)
        # v = (0, cos x, 0)
        f = SpectralField.from_modes(lat, {(1, 0, 0): [0, 0.5, 0], (-1, 0, 0): [0, 0.5, 0]})
        u = f.to_physical(8)
        x = 2 * np.pi * np.arange(8) / 8
        np.testing.assert_allclose(u[1], np.cos(x)[:, None, None] * np.ones((8, 8, 8)), atol=1e-15)
        np.testing.assert_allclose(u[0], 0, atol=1e-15)

    def test_scalar_field(self):
        lat = Lattice(1)
        s = ScalarSpectralField(lat, np.ones(lat.shape))
        assert s.coeff((0, 0, 0)) == 0
        assert s.coeff((1, 1, 1)) == 1


class TestProjection:
    def test_kills_parallel_component(self):
        lat = Lattice(1)
        f = SpectralField.from_modes(lat, {(1, 0, 0): [1, 2, 3]})
        np.testing.assert_array_equal(project_solenoidal(f).coeff((1, 0, 0)), [0, 2, 3])

    def test_parallel_goes_to_zero(self):
        lat = Lattice(2)
        f = SpectralField.from_modes(lat, {(1, 2, -1): [2, 4, -2]})
        assert np.abs(project_solenoidal(f).coeffs).max() < 1e-15

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 4))
    def test_idempotent_and_divergence_free(self, seed, N):
        f = random_field(Lattice(N), np.random.default_rng(seed), solenoidal=False)
        p = project_solenoidal(f)
        assert divergence_defect(p) < 1e-15
        assert np.abs(project_solenoidal(p).coeffs - p.coeffs).max() <= 1e-15 * np.abs(p.coeffs).max()


class TestHermitian:
    def test_half_split(self):
        lat = Lattice(1)
        f = SpectralField.from_modes(lat, {(1, 0, 0): [1, 1, 1]})
        h = enforce_hermitian(f)
        np.testing.assert_array_equal(h.coeff((1, 0, 0)), [0.5] * 3)
        np.testing.assert_array_equal(h.coeff((-1, 0, 0)), [0.5] * 3)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_idempotent_and_exact(self, seed):
        rng = np.random.default_rng(seed)
        lat = Lattice(2)
        raw = rng.standard_normal((3,) + lat.shape) + 1j * rng.standard_normal((3,) + lat.shape)
        h = enforce_hermitian(SpectralField(lat, raw))
        assert hermitian_defect(h) == 0.0
        np.testing.assert_array_equal(enforce_hermitian(h).coeffs, h.coeffs)

    def test_random_field_is_real(self):
        f = random_field(Lattice(3), np.random.default_rng(1))
        assert hermitian_defect(f) == 0.0
        assert divergence_defect(f) < 1e-15


class TestNonlinearTerm:
    def test_shear_mode_is_zero(self):
        lat = Lattice(3)
        f = SpectralField.from_modes(lat, {(1, 0, 0): [0, 0.5, 0], (-1, 0, 0): [0, 0.5, 0]}, True)
        for proj in (True, False):
            assert np.abs(nonlinear_term(f, proj).coeffs).max() < 1e-16

    def test_abc_flow_projected_is_zero(self):
        lat = Lattice(3)
        f = make_ic(ICSpec("abc", A=1.0, B=0.7, C=0.3), lat)
        assert np.abs(nonlinear_term(f, True).coeffs).max() < 1e-13
        # without projection only the gradient of |v|^2/2 remains
        raw = nonlinear_term(f, False).coeffs
        assert np.abs(raw).max() > 0.1
        assert divergence_defect(SpectralField(lat, raw)) > 0.99

    @pytest.mark.parametrize("N,seed", [(1, 0), (2, 1), (3, 2), (4, 3)])
    @pytest.mark.parametrize("proj", [True, False])
    def test_matches_double_sum(self, N, seed, proj):
        f = random_field(Lattice(N), np.random.default_rng(seed), solenoidal=proj)
        got = nonlinear_term(f, proj).coeffs
        want = brute_nonlinear(np.array(f.coeffs), N, proj)
        assert rel_err(got, want) < 1e-12

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), N=st.integers(2, 5))
    def test_energy_neutral(self, seed, N):
        f = random_field(Lattice(N), np.random.default_rng(seed))
        nl = nonlinear_term(f, True).coeffs
        transfer = np.sum(np.conj(f.coeffs) * nl).real
        scale = np.sqrt(np.sum(np.abs(f.coeffs) ** 2)) * np.sqrt(np.sum(np.abs(nl) ** 2))
        assert abs(transfer) <= 1e-13 * scale

    def test_output_hermitian_and_solenoidal(self):
        f = random_field(Lattice(4), np.random.default_rng(5))
        nl = nonlinear_term(f)
        assert hermitian_defect(nl) == 0.0
        assert divergence_defect(nl) < 1e-13


class TestRandomField:
    def test_unit_direction_shape(self):
        lat = Lattice(4)
        f = random_field(lat, np.random.default_rng(3), decay=0.5, power=1.0, unit_direction=True)
        mag = np.sqrt(np.sum(np.abs(f.coeffs) ** 2, axis=0))[lat.retained]
        k = lat.knorm[lat.retained]
        np.testing.assert_allclose(mag, np.exp(-0.5 * k) / k, rtol=1e-14)

    def test_seed_determinism(self):
        lat = Lattice(3)
        a = random_field(lat, np.random.default_rng(11))
        b = random_field(lat, np.random.default_rng(11))
        np.testing.assert_array_equal(a.coeffs, b.coeffs)
