import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xxzmagnon import (
    CapabilityError,
    ChainParams,
    InsufficientDataError,
    InvariantViolationError,
    TimeSeries,
    ValidationError,
    amplitude,
    amplitude_vector,
    entanglement_from_amplitude,
    evolve_closed_form,
    evolve_dense,
    full_hilbert_check,
    leading_exponent_fit,
)


class TestEntanglementFromAmplitude:
    def test_pure_states_are_unentangled(self):
        assert entanglement_from_amplitude(1.0 + 0j) == 0.0
        assert entanglement_from_amplitude(0.0 + 0j) == 0.0

    def test_maximal_mixedness(self):
        c = cmath.exp(0.7j) / math.sqrt(2)
        assert entanglement_from_amplitude(c) == pytest.approx(0.25, abs=1e-15)

    def test_clamps_roundoff_overshoot(self):
        assert entanglement_from_amplitude(1.0 + 4e-13) == 0.0

    def test_rejects_unphysical_amplitude(self):
        with pytest.raises(InvariantViolationError):
            entanglement_from_amplitude(1.0 + 1e-11)

    @settings(max_examples=50, deadline=None)
    @given(r=st.floats(0.0, 1.0), phi=st.floats(0.0, 2 * math.pi))
    def test_range(self, r, phi):
        val = entanglement_from_amplitude(r * cmath.exp(1j * phi))
        assert 0.0 <= val <= 0.25


class TestEvolveClosedForm:
    def test_starts_unentangled(self):
        series = evolve_closed_form(ChainParams(33), 0, np.linspace(0, 5, 11))
        assert series.values[0] == 0.0
        assert np.all(series.values >= 0) and np.all(series.values <= 0.25)

    def test_parity_same_series(self):
        p = ChainParams(33)
        grid = np.linspace(0, 10, 40)
        left = evolve_closed_form(p, -7, grid)
        right = evolve_closed_form(p, 7, grid)
        assert np.array_equal(left.values, right.values)

    def test_rejects_unsorted_grid(self):
        with pytest.raises(ValidationError):
            evolve_closed_form(ChainParams(9), 0, [1.0, 0.5])
        with pytest.raises(ValidationError):
            evolve_closed_form(ChainParams(9), 0, [-1.0, 0.5])


class TestEvolveDense:
    def test_initial_state_is_basis_vector(self):
        vec = evolve_dense(ChainParams(9), 0.0)
        assert vec.entries[4] == 1.0
        assert np.count_nonzero(vec.entries) == 1

    @pytest.mark.parametrize("t", [0.7, 5.0])
    def test_unit_norm(self, t):
        vec = evolve_dense(ChainParams(33), t)
        assert abs(np.linalg.norm(vec.entries) - 1.0) <= 1e-10

    def test_agrees_with_closed_form(self):
        p = ChainParams(33)
        dense = evolve_dense(p, 5.0).entries
        closed = amplitude_vector(p, 5.0).entries
        assert np.max(np.abs(dense - closed)) <= 1e-8

    def test_agrees_at_long_time_large_chain(self):
        p = ChainParams(65)
        dense = evolve_dense(p, 50.0).entries
        closed = amplitude_vector(p, 50.0).entries
        assert np.max(np.abs(dense - closed)) <= 1e-8

    def test_anisotropy_does_not_move_probabilities(self):
        a = np.abs(evolve_dense(ChainParams(9, anisotropy_delta=0.0), 2.0).entries)
        b = np.abs(evolve_dense(ChainParams(9, anisotropy_delta=0.8), 2.0).entries)
        assert np.max(np.abs(a - b)) <= 1e-10


class TestFullHilbertCheck:
    def test_initial_reduced_states_are_pure(self):
        rhos = full_hilbert_check(ChainParams(7), 0.0)
        for rho in rhos:
            assert abs(rho[0, 1]) <= 1e-14
            assert abs(np.linalg.det(rho)) <= 1e-14

    def test_superselection_kills_coherences(self):
        rhos = full_hilbert_check(ChainParams(7), 1.3)
        assert max(abs(r[0, 1]) for r in rhos) <= 1e-10

    def test_determinant_matches_single_magnon_form(self):
        p = ChainParams(7, anisotropy_delta=0.5)
        rhos = full_hilbert_check(p, 1.3)
        for site, rho in zip(p.sites(), rhos):
            expected = entanglement_from_amplitude(amplitude(p, site, 1.3))
            assert np.linalg.det(rho).real == pytest.approx(expected, abs=1e-8)

    def test_anisotropy_independent_determinants(self):
        det_sets = []
        for delta in (0.0, 0.5, 1.0):
            rhos = full_hilbert_check(ChainParams(7, anisotropy_delta=delta), 1.3)
            det_sets.append([np.linalg.det(r).real for r in rhos])
        for other in det_sets[1:]:
            assert np.max(np.abs(np.array(other) - np.array(det_sets[0]))) <= 1e-9

    def test_size_cap(self):
        with pytest.raises(CapabilityError):
            full_hilbert_check(ChainParams(9), 0.1)


class TestLeadingExponentFit:
    def test_recovers_synthetic_quartic(self):
        t = np.geomspace(1.1e-3, 0.9e-2, 50)  # values span [1e-12, 1e-8]
        series = TimeSeries(q=1, params=ChainParams(9), times=t, values=t ** 4)
        exponent, prefactor = leading_exponent_fit(series)
        assert exponent == pytest.approx(4.0, abs=1e-9)
        assert prefactor == pytest.approx(1.0, rel=1e-9)

    def test_oracle_transient_exponent_midrange(self):
        # q=5 transient window sits at small enough t that the power law is clean
        p = ChainParams(201)
        grid = np.geomspace(0.25, 0.95, 160)
        series = evolve_closed_form(p, 5, grid)
        exponent, _ = leading_exponent_fit(series)
        assert exponent == pytest.approx(10.0, rel=0.01)

    def test_oracle_transient_prefactor_q2(self):
        p = ChainParams(201)
        grid = np.geomspace(2e-3, 3.2e-2, 160)
        series = evolve_closed_form(p, 2, grid)
        _, prefactor = leading_exponent_fit(series)
        target = (1.0 / math.factorial(2) ** 2) * 0.5 ** 4  # 1/64
        assert prefactor == pytest.approx(target, rel=0.02)

    def test_needs_enough_window_points(self):
        t = np.array([0.1, 0.2, 0.3])
        series = TimeSeries(q=1, params=ChainParams(9), times=t, values=t * 1e-20)
        with pytest.raises(InsufficientDataError):
            leading_exponent_fit(series)


class TestTimeSeries:
    def test_rejects_out_of_range_values(self):
        with pytest.raises(InvariantViolationError):
            TimeSeries(q=0, params=ChainParams(9), times=np.array([0.0, 1.0]),
                       values=np.array([0.0, 0.3]))

    def test_rejects_nonzero_start(self):
        with pytest.raises(InvariantViolationError):
            TimeSeries(q=0, params=ChainParams(9), times=np.array([0.0, 1.0]),
                       values=np.array([1e-3, 1e-3]))
