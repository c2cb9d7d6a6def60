import math

import numpy as np
import pytest

import oracles
from bosegas import (
    BracketError,
    CutoffError,
    FiniteSpectrum,
    SpectrumCutoff,
    ThermalState,
    TrapGeometry,
    build_partition_table,
    characteristic_temperature,
    mean_occupation,
    mean_occupations,
    occupancy_distribution,
    occupation_spectrum,
    sticking_ratio,
    temperature_for_fraction,
)
from bosegas.canonical import _occupancy_raw, ground_fraction

LN2 = math.log(2.0)
TWO_LEVEL = FiniteSpectrum((0.0, 1.0))


def make_state(n, t):
    return ThermalState(n, t)


class TestPartitionTable:
    def test_base_case_n1(self):
        g = TrapGeometry((0.8, 1.9))
        table = build_partition_table(g, make_state(1, 2.5))
        assert table.log_z[0] == 0.0
        assert table.log_z[1] == pytest.approx(g.log_z1(0.4), rel=1e-14)

    def test_two_level_n2(self):
        # direct enumeration: occupations (2,0),(1,1),(0,2) -> Z_2 = 1 + 1/2 + 1/4
        table = build_partition_table(TWO_LEVEL, make_state(2, 1.0 / LN2))
        assert math.exp(table.log_z[2]) == pytest.approx(1.75, rel=1e-14)

    def test_frozen_limit(self):
        table = build_partition_table(TrapGeometry.isotropic(1), make_state(5, 1e-3))
        assert math.exp(table.log_z[5]) == pytest.approx(1.0, abs=1e-12)

    def test_monotone_in_temperature(self):
        g = TrapGeometry.isotropic(2)
        z_cold = build_partition_table(g, make_state(30, 2.0)).log_z
        z_hot = build_partition_table(g, make_state(30, 3.0)).log_z
        assert np.all(z_hot[1:] > z_cold[1:])


class TestOracleEquivalence:
    """Recursion vs exhaustive occupation-multiset enumeration, N <= 4."""

    @pytest.mark.parametrize("seed", range(6))
    def test_random_spectra(self, seed):
        rng = np.random.default_rng(seed)
        n_levels = int(rng.integers(2, 13))
        energies = np.concatenate([[0.0], np.sort(rng.uniform(0.2, 4.0, n_levels - 1))])
        beta = rng.uniform(0.3, 3.0)
        system = FiniteSpectrum(tuple(energies))
        for n_atoms in range(1, 5):
            table = build_partition_table(system, make_state(n_atoms, 1.0 / beta))
            z_ref = oracles.partition_function(energies, beta, n_atoms)
            assert math.exp(table.log_z[n_atoms]) == pytest.approx(z_ref, rel=1e-12)
            for level in (0, n_levels - 1):
                p_ref = oracles.occupancy_distribution(energies, beta, n_atoms, level)
                p = occupancy_distribution(table, energies[level])
                assert np.allclose(p, p_ref, atol=1e-12)
                occ_ref = oracles.mean_occupation(energies, beta, n_atoms, level)
                assert mean_occupation(table, energies[level]) == pytest.approx(
                    occ_ref, abs=1e-12
                )

    def test_two_level_documented_values(self):
        table = build_partition_table(TWO_LEVEL, make_state(2, 1.0 / LN2))
        p = occupancy_distribution(table, 1.0)
        # P(0) = (Z_2 - e^-beta Z_1)/Z_2 = 1/1.75
        assert p[0] == pytest.approx(1.0 / 1.75, rel=1e-12)
        assert mean_occupation(table, 1.0) == pytest.approx(1.0 / 1.75, rel=1e-12)


class TestOccupancyDistribution:
    def test_normalized(self):
        g = TrapGeometry.isotropic(1)
        table = build_partition_table(g, make_state(100, 20.0))
        for energy in (0.0, 1.0, 7.0):
            p = occupancy_distribution(table, energy)
            assert p.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.all(p >= 0)

    def test_raw_negatives_tiny(self):
        g = TrapGeometry.isotropic(1)
        for t in (5.0, 50.0, 150.0):
            table = build_partition_table(g, make_state(200, t))
            for energy in (0.0, 1.0, 10.0):
                raw = _occupancy_raw(table, energy)
                assert raw.sum() == pytest.approx(1.0, abs=1e-10)
                assert raw.min() > -1e-14

    def test_zero_temperature_ground(self):
        g = TrapGeometry.isotropic(1)
        table = build_partition_table(g, make_state(10, 1e-2))
        p = occupancy_distribution(table, 0.0)
        assert p[10] == pytest.approx(1.0, abs=1e-10)

    def test_negative_energy_rejected(self):
        table = build_partition_table(TrapGeometry.isotropic(1), make_state(3, 1.0))
        with pytest.raises(ValueError):
            occupancy_distribution(table, -0.1)


class TestMeanOccupation:
    def test_equivalence_of_both_forms(self):
        # sum_n n P(n) and sum_{n>=1} P>=(n) must agree
        g = TrapGeometry.isotropic(2)
        table = build_partition_table(g, make_state(150, 8.0))
        for energy in (0.0, 1.0, 2.0, 5.0):
            p = occupancy_distribution(table, energy)
            direct = np.dot(np.arange(151), p)
            assert mean_occupation(table, energy) == pytest.approx(
                direct, abs=1e-10 * 150
            )

    def test_frozen_limits(self):
        g = TrapGeometry.isotropic(1)
        table = build_partition_table(g, make_state(40, 1e-2))
        assert mean_occupation(table, 0.0) == pytest.approx(40.0, abs=1e-8)
        assert mean_occupation(table, 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_batch_matches_scalar(self):
        g = TrapGeometry.isotropic(1)
        table = build_partition_table(g, make_state(60, 12.0))
        energies = np.array([0.0, 1.0, 3.0, 9.0])
        batch = mean_occupations(table, energies)
        for e, v in zip(energies, batch):
            assert v == pytest.approx(mean_occupation(table, e), rel=1e-13)


class TestOccupationSpectrum:
    def test_normalization(self):
        g = TrapGeometry.isotropic(1)
        spec = occupation_spectrum(g, make_state(300, 30.0))
        total = spec.occupations.sum()
        assert 300 * (1 - 1e-6) <= total <= 300.0

    def test_monotone_and_degenerate(self):
        g = TrapGeometry.isotropic(3)
        spec = occupation_spectrum(g, make_state(200, 3.0))
        assert np.all(np.diff(spec.occupations) <= 1e-12)
        first_excited = spec.occupations[1:4]  # threefold degenerate level
        assert np.allclose(spec.energies[1:4], 1.0)
        assert np.ptp(first_excited) <= 1e-12 * first_excited[0]

    def test_low_temperature(self):
        g = TrapGeometry.isotropic(1)
        spec = occupation_spectrum(g, make_state(1000, 0.05))
        assert spec.condensate_occupation / 1000 == pytest.approx(1.0, abs=1e-6)
        assert spec.occupations[1] / 1000 == pytest.approx(0.0, abs=1e-6)

    def test_cutoff_too_small(self):
        g = TrapGeometry.isotropic(1)
        with pytest.raises(CutoffError) as err:
            occupation_spectrum(g, make_state(500, 50.0), cutoff=SpectrumCutoff(5.0))
        assert err.value.captured_fraction is not None
        assert err.value.captured_fraction < 1.0

    def test_scale_invariance(self):
        # scaling all frequencies and T together leaves occupations unchanged
        state1 = make_state(80, 7.0)
        spec1 = occupation_spectrum(TrapGeometry((1.0, 0.5)), state1)
        factor = 3.7
        state2 = make_state(80, 7.0 * factor)
        spec2 = occupation_spectrum(TrapGeometry((factor, 0.5 * factor)), state2)
        m = min(len(spec1), len(spec2))
        assert np.allclose(
            spec1.occupations[:m], spec2.occupations[:m], rtol=1e-12, atol=1e-12
        )
        assert sticking_ratio(spec1, 1) == pytest.approx(
            sticking_ratio(spec2, 1), rel=1e-12
        )


class TestStickingRatio:
    def test_frozen_gas(self):
        spec = occupation_spectrum(TrapGeometry.isotropic(1), make_state(100, 0.05))
        assert sticking_ratio(spec, 1) == pytest.approx(0.0, abs=1e-6)

    def test_isotropic_degeneracy(self):
        spec = occupation_spectrum(TrapGeometry.isotropic(3), make_state(200, 4.0))
        # N_1 and N_2 come from the same degenerate level at isotropy
        assert sticking_ratio(spec, 1) == pytest.approx(sticking_ratio(spec, 2), rel=1e-12)

    def test_increasing_with_temperature(self):
        g = TrapGeometry.isotropic(1)
        ratios = [
            sticking_ratio(occupation_spectrum(g, make_state(150, t)), 1)
            for t in (5.0, 10.0, 20.0, 40.0)
        ]
        assert np.all(np.diff(ratios) > 0)

    def test_bad_k(self):
        spec = occupation_spectrum(TrapGeometry.isotropic(1), make_state(20, 2.0))
        with pytest.raises(ValueError):
            sticking_ratio(spec, 3)


class TestTemperatureForFraction:
    def test_self_consistency(self):
        g = TrapGeometry.isotropic(1)
        state = temperature_for_fraction(g, 1000, 0.2)
        assert ground_fraction(g, state) == pytest.approx(0.2, abs=1e-8)

    def test_near_unity_fraction_gives_low_temperature(self):
        g = TrapGeometry.isotropic(1)
        state = temperature_for_fraction(g, 200, 0.999)
        assert state.temperature < 5.0

    def test_3d_near_tc(self):
        g = TrapGeometry.isotropic(3)
        state = temperature_for_fraction(g, 1000, 0.2)
        tc = characteristic_temperature(g, 1000)
        assert 0.5 < state.temperature / tc < 1.0

    def test_monotone_ground_fraction(self):
        g = TrapGeometry.isotropic(1)
        fracs = [ground_fraction(g, make_state(300, t)) for t in (10.0, 25.0, 50.0, 80.0)]
        assert np.all(np.diff(fracs) < 0)

    def test_invalid_fraction(self):
        with pytest.raises(ValueError):
            temperature_for_fraction(TrapGeometry.isotropic(1), 100, 1.5)

    def test_bracket_error(self):
        with pytest.raises(BracketError):
            temperature_for_fraction(
                TrapGeometry.isotropic(1), 100, 0.9, t_bounds=(50.0, 60.0)
            )
