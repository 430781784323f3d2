import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import lambertw

from gevrey.errors import ConfigError, TransformError
from gevrey.lattice import Lattice, SpectralField, random_field
from gevrey.norms import GevreyIndex, TripleNormParams, gevrey_norm, sobolev_norm, triple_norm
from gevrey.xform import (
    CriticalShift,
    FixedSobolev,
    LinearInTime,
    Sobolev,
    Triple,
    VoigtTriple,
    beta_admissible,
    solve_psi,
    strip_of_w,
    v_to_w,
    w_to_v,
)

from oracles import bisect

SPECS = [
    FixedSobolev(beta=0.3, epsilon=1.0, s=0.5),
    VoigtTriple(beta=0.4, epsilon=1.5, alpha=1.0, s=0.75),
    CriticalShift(beta=0.2, alpha=0.8),
    LinearInTime(beta=0.7),
]


def unit_pair(lat):
    return SpectralField.from_modes(lat, {(1, 0, 0): [0, 1, 0], (-1, 0, 0): [0, 1, 0]}, True)


def rel(a, b):
    return np.abs(a - b).max() / np.abs(b).max()


class TestSolvePsi:
    @pytest.mark.parametrize("q", [0.0, 1.0, 2.0])
    def test_single_shell_closed_form(self, q):
        # psi * sqrt(2) e^psi = 1
        sol = solve_psi(unit_pair(Lattice(2)), 1.0, 1.0, Sobolev(q))
        assert sol.psi == pytest.approx(lambertw(1 / math.sqrt(2)).real, rel=1e-14)
        assert sol.psi == pytest.approx(0.451, abs=5e-4)
        assert abs(sol.residual) <= 1e-12

    def test_matches_bisection(self):
        f = random_field(Lattice(3), np.random.default_rng(0))

        def lhs(psi):
            return psi * gevrey_norm(f, GevreyIndex(psi, 1.0)) ** 0.7 - 0.25

        want = bisect(lhs, 0.0, 10.0)
        assert solve_psi(f, 0.25, 0.7, Sobolev(1.0)).psi == pytest.approx(want, rel=1e-12)

    def test_small_beta_limit(self):
        f = random_field(Lattice(2), np.random.default_rng(1))
        psis = [solve_psi(f, b, 1.0, Sobolev(0.5)).psi for b in (1e-2, 1e-5, 1e-9)]
        assert psis[0] > psis[1] > psis[2] > 0
        assert psis[2] < 1e-8

    def test_uniqueness_different_brackets(self):
        f = random_field(Lattice(3), np.random.default_rng(2))
        a = solve_psi(f, 0.5, 1.2, Triple(1.0, 0.5), bracket=(0.0, 1e-6)).psi
        b = solve_psi(f, 0.5, 1.2, Triple(1.0, 0.5), bracket=(5.0, 50.0)).psi
        assert abs(a - b) <= 1e-12 * a

    def test_invalid_beta(self):
        with pytest.raises(ConfigError):
            solve_psi(unit_pair(Lattice(1)), 0.0, 1.0, Sobolev(0.0))


class TestTransforms:
    def test_zero_field_conventions(self):
        z = SpectralField.zeros(Lattice(2))
        assert v_to_w(z, SPECS[0]).psi == 0.0
        assert v_to_w(z, SPECS[2]).psi == SPECS[2].beta
        assert v_to_w(z, SPECS[2]).w.is_zero()
        assert w_to_v(z, SPECS[2]).is_zero()
        with pytest.raises(TransformError):
            w_to_v(z, SPECS[0])

    def test_linear_in_time_identity_at_zero(self):
        f = random_field(Lattice(3), np.random.default_rng(3))
        np.testing.assert_array_equal(v_to_w(f, LinearInTime(2.0), 0.0).w.coeffs, f.coeffs)
        with pytest.raises(ConfigError):
            v_to_w(f, LinearInTime(2.0), -1.0)

    def test_single_shell_damping_factor(self):
        lat = Lattice(2)
        w = unit_pair(lat).scaled(3.0)
        spec = FixedSobolev(beta=0.6, epsilon=1.0, s=0.5)
        # ||w||_{2} = 3 sqrt(2) on the unit shell
        factor = math.exp(-0.6 / (3 * math.sqrt(2)))
        np.testing.assert_allclose(w_to_v(w, spec).coeff((1, 0, 0)), [0, 3 * factor, 0], rtol=1e-15)

    @pytest.mark.parametrize("spec", SPECS, ids=lambda s: type(s).__name__)
    @settings(max_examples=12, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), amp=st.floats(1e-3, 1e2))
    def test_round_trips(self, spec, seed, amp):
        v = random_field(Lattice(4), np.random.default_rng(seed)).scaled(amp)
        tr = v_to_w(v, spec, 0.9)
        assert abs(tr.residual) <= 1e-12 * spec.beta
        assert rel(w_to_v(tr.w, spec, 0.9).coeffs, v.coeffs) <= 1e-12
        assert strip_of_w(tr.w, spec, 0.9) == pytest.approx(tr.psi, rel=1e-12)
        w = v
        assert rel(v_to_w(w_to_v(w, spec, 0.9), spec, 0.9).w.coeffs, w.coeffs) <= 1e-12

    def test_equality_chain_fixed_sobolev(self):
        v = random_field(Lattice(4), np.random.default_rng(5))
        spec = FixedSobolev(beta=0.5, epsilon=0.8, s=0.25)
        tr = v_to_w(v, spec)
        wn = sobolev_norm(tr.w, 1.75)
        assert tr.psi == pytest.approx(0.5 * wn**-0.8, rel=1e-13)
        assert gevrey_norm(v, (tr.psi, 1.75)) == pytest.approx(wn, rel=1e-13)

    def test_critical_shift_equation(self):
        v = random_field(Lattice(3), np.random.default_rng(6))
        spec = CriticalShift(beta=0.3, alpha=1.3)
        tr = v_to_w(v, spec)
        trip = triple_norm(tr.w, TripleNormParams(1.3, 0.5))
        assert tr.psi * (1 + trip) ** 2 == pytest.approx(0.3, rel=1e-13)

    @pytest.mark.parametrize(
        "bad",
        [
            lambda: FixedSobolev(0.1, 1.0, 0.6),
            lambda: FixedSobolev(0.1, 2.0, 0.5),
            lambda: VoigtTriple(-0.1, 1.0, 1.0, 1.0),
            lambda: CriticalShift(0.1, 0.0),
            lambda: LinearInTime(0.0),
        ],
    )
    def test_parameter_validation(self, bad):
        with pytest.raises(ConfigError):
            bad()


class TestAdmissibility:
    def _gamma(self, v, sigma):
        return gevrey_norm(v, GevreyIndex(sigma, 2.0))

    @pytest.mark.parametrize("factor,expected", [(0.5, True), (2.0, False), (1.0, False)])
    def test_strict_inequality(self, factor, expected):
        v = unit_pair(Lattice(2))
        sigma, eps = 0.5, 1.0
        beta = factor * sigma * self._gamma(v, sigma) ** eps
        assert beta_admissible(v, FixedSobolev(beta, eps, 0.5), sigma) is expected

    def test_linear_in_time_always(self):
        assert beta_admissible(unit_pair(Lattice(1)), LinearInTime(100.0), 0.1)

    def test_sigma_positive(self):
        with pytest.raises(ConfigError):
            beta_admissible(unit_pair(Lattice(1)), SPECS[0], 0.0)
