import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import j0 as scipy_j0

from xxzmagnon import (
    ChainParams,
    ValidationError,
    amplitude,
    amplitude_vector,
    group_velocity,
    momenta,
)


class TestChainParams:
    def test_defaults_and_group_velocity(self):
        p = ChainParams(9)
        assert p.coupling_j == 1.0 and p.hbar == 1.0
        assert p.group_velocity == 1.0

    @pytest.mark.parametrize("j,hbar,expected", [(1.0, 1.0, 1.0), (2.0, 1.0, 2.0), (1.0, 2.0, 0.5)])
    def test_group_velocity_values(self, j, hbar, expected):
        assert group_velocity(ChainParams(5, coupling_j=j, hbar=hbar)) == expected

    @pytest.mark.parametrize("n", [2, 4, 1, -3, 0])
    def test_rejects_bad_site_counts(self, n):
        with pytest.raises(ValidationError):
            ChainParams(n)

    def test_rejects_bad_couplings(self):
        with pytest.raises(ValidationError):
            ChainParams(5, coupling_j=0.0)
        with pytest.raises(ValidationError):
            ChainParams(5, hbar=-1.0)


class TestMomenta:
    def test_n5_grid(self):
        modes = momenta(ChainParams(5))
        assert [m.m for m in modes] == [-2, -1, 0, 1, 2]
        assert modes[0].momentum_k == pytest.approx(-4 * math.pi / 5, abs=0)
        assert modes[-1].momentum_k == pytest.approx(4 * math.pi / 5, abs=0)

    def test_zero_mode_energy_at_isotropy(self):
        modes = momenta(ChainParams(5, anisotropy_delta=1.0))
        assert modes[2].m == 0
        assert modes[2].energy == 0.0

    def test_n9_symmetric_energies(self):
        # direct evaluation: E(+-2) = -J cos(4 pi / 9) at Delta = 0
        modes = {m.m: m for m in momenta(ChainParams(9))}
        expected = -math.cos(4 * math.pi / 9)
        assert modes[2].energy == pytest.approx(expected, abs=1e-15)
        assert modes[-2].energy == modes[2].energy  # bitwise by construction

    def test_momenta_sum_to_zero(self):
        for n in (3, 9, 33):
            modes = momenta(ChainParams(n))
            assert len(modes) == n
            assert sum(m.m for m in modes) == 0


class TestAmplitude:
    def test_initial_condition(self):
        p = ChainParams(11)
        assert amplitude(p, 0, 0.0) == 1.0
        for q in (-5, -1, 1, 3, 5):
            assert abs(amplitude(p, q, 0.0)) < 1e-15

    def test_free_spreading_matches_bessel(self):
        # lattice aliasing at N=201 is O(J_201(2)), far below the tolerance
        p = ChainParams(201)
        c = amplitude(p, 0, 2.0)
        assert abs(c - scipy_j0(2.0)) <= 1e-10

    def test_site_range_error(self):
        with pytest.raises(ValidationError):
            amplitude(ChainParams(9), 5, 1.0)
        with pytest.raises(ValidationError):
            amplitude(ChainParams(9), 0, -0.5)

    @settings(max_examples=30, deadline=None)
    @given(t=st.floats(0.0, 50.0), n=st.sampled_from([3, 9, 33]))
    def test_unitarity(self, t, n):
        vec = amplitude_vector(ChainParams(n), t)
        norm_sq = math.fsum(abs(c) ** 2 for c in vec.entries)
        assert abs(norm_sq - 1.0) <= 1e-12

    @settings(max_examples=30, deadline=None)
    @given(t=st.floats(0.0, 50.0), q=st.integers(1, 16))
    def test_parity(self, t, q):
        p = ChainParams(33)
        assert amplitude(p, q, t) == amplitude(p, -q, t)  # bitwise

    @settings(max_examples=30, deadline=None)
    @given(t=st.floats(0.0, 20.0), delta=st.floats(-2.0, 2.0), q=st.integers(-4, 4))
    def test_anisotropy_is_a_global_phase(self, t, delta, q):
        base = abs(amplitude(ChainParams(9), q, t))
        other = abs(amplitude(ChainParams(9, anisotropy_delta=delta), q, t))
        assert abs(base - other) <= 1e-12

    def test_amplitude_vector_site_accessor(self):
        vec = amplitude_vector(ChainParams(9), 1.5)
        assert vec.site(-4) == vec.entries[0]
        assert vec.site(4) == vec.entries[-1]
        with pytest.raises(ValidationError):
            vec.site(5)
