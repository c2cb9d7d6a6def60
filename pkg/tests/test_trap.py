import math

import numpy as np
import pytest
from scipy.special import zeta

from bosegas import (
    FiniteSpectrum,
    ResourceLimitError,
    SpectrumCutoff,
    TrapGeometry,
    characteristic_temperature,
    enumerate_modes,
    mode_energy,
    single_particle_z,
)


class TestTrapGeometry:
    def test_isotropic(self):
        g = TrapGeometry.isotropic(2)
        assert g.omega == (1.0, 1.0)
        assert g.dimension == 2

    def test_aspect_ratio(self):
        g = TrapGeometry.from_aspect_ratio(0.1)
        assert g.omega == (1.0, 1.0, 0.1)

    @pytest.mark.parametrize("omega", [(), (1.0,) * 4, (1.0, -1.0), (1.0, 0.0)])
    def test_invalid(self, omega):
        with pytest.raises(ValueError):
            TrapGeometry(omega)

    def test_geometric_mean(self):
        g = TrapGeometry((1.0, 1.0, 0.001))
        assert g.geometric_mean_frequency == pytest.approx(0.1)


class TestModeEnergy:
    def test_ground_is_zero(self):
        assert mode_energy(TrapGeometry.isotropic(1), (0,)) == 0.0

    def test_isotropic_3d(self):
        assert mode_energy(TrapGeometry.isotropic(3), (1, 1, 1)) == 3.0

    def test_anisotropic(self):
        g = TrapGeometry((1.0, 1.0, 0.1))
        assert mode_energy(g, (0, 0, 3)) == pytest.approx(0.3)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            mode_energy(TrapGeometry.isotropic(2), (1, 1, 1))

    def test_negative_quanta(self):
        with pytest.raises(ValueError):
            mode_energy(TrapGeometry.isotropic(1), (-1,))


class TestEnumerateModes:
    def test_counts(self):
        # level degeneracies: 1D one per level, 2D n+1, 3D (n+1)(n+2)/2
        cases = [(1, 5.0, 6), (2, 3.0, 10), (3, 2.0, 10)]
        for dim, e_max, expect in cases:
            q, e = enumerate_modes(TrapGeometry.isotropic(dim), SpectrumCutoff(e_max))
            assert q.shape == (expect, dim)
            assert np.all(e <= e_max + 1e-9)

    def test_sorted_by_energy_then_lex(self):
        g = TrapGeometry.isotropic(3)
        q, e = enumerate_modes(g, SpectrumCutoff(3.0))
        assert np.all(np.diff(e) >= 0)
        for i in range(len(e) - 1):
            if e[i] == e[i + 1]:
                assert tuple(q[i]) < tuple(q[i + 1])

    @pytest.mark.parametrize("dim", [1, 2, 3])
    def test_level_degeneracy_binomial(self, dim):
        g = TrapGeometry.isotropic(dim)
        q, e = enumerate_modes(g, SpectrumCutoff(8.0))
        levels = np.round(e).astype(int)
        for n in range(9):
            count = int(np.sum(levels == n))
            assert count == math.comb(n + dim - 1, dim - 1)

    def test_completeness_anisotropic(self):
        g = TrapGeometry((0.7, 1.3))
        q, e = enumerate_modes(g, SpectrumCutoff(5.0))
        expect = {
            (i, j)
            for i in range(10)
            for j in range(10)
            if 0.7 * i + 1.3 * j <= 5.0
        }
        assert {tuple(row) for row in q} == expect

    def test_mode_limit(self):
        g = TrapGeometry.isotropic(3)
        with pytest.raises(ResourceLimitError):
            enumerate_modes(g, SpectrumCutoff(100.0, mode_limit=1000))


class TestSingleParticleZ:
    def test_1d_geometric_series(self):
        # beta = ln 2: sum of (1/2)^n = 2
        z = math.exp(single_particle_z(TrapGeometry.isotropic(1), math.log(2.0)))
        assert z == pytest.approx(2.0, rel=1e-14)

    def test_3d_factorizes(self):
        z = math.exp(single_particle_z(TrapGeometry.isotropic(3), math.log(2.0)))
        assert z == pytest.approx(8.0, rel=1e-13)

    def test_zero_temperature_limit(self):
        z = math.exp(single_particle_z(TrapGeometry.isotropic(1), 500.0))
        assert z == pytest.approx(1.0, abs=1e-12)

    def test_invalid_beta(self):
        with pytest.raises(ValueError):
            single_particle_z(TrapGeometry.isotropic(1), -1.0)

    def test_axis_factorization(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            omega = tuple(rng.uniform(0.1, 3.0, size=3))
            beta = rng.uniform(0.01, 10.0)
            total = TrapGeometry(omega).log_z1(beta)
            per_axis = sum(TrapGeometry((w,)).log_z1(beta) for w in omega)
            assert total == pytest.approx(per_axis, rel=1e-13)

    def test_matches_truncated_mode_sum(self):
        # brute-force sum over enumerated modes with an analytic tail bound
        rng = np.random.default_rng(11)
        for _ in range(10):
            dim = int(rng.integers(1, 4))
            omega = tuple(rng.uniform(0.5, 2.0, size=dim))
            beta = rng.uniform(0.5, 5.0)
            g = TrapGeometry(omega)
            w_min = min(omega)
            tol = 1e-12
            e_max = -math.log(tol * -math.expm1(-beta * w_min)) / beta + max(omega)
            q, e = enumerate_modes(g, SpectrumCutoff(e_max, tol))
            brute = np.sum(np.exp(-beta * e))
            assert math.exp(g.log_z1(beta)) == pytest.approx(brute, rel=1e-10)

    def test_monotone_in_beta(self):
        g = TrapGeometry((0.6, 1.7))
        betas = np.geomspace(0.01, 10.0, 40)
        vals = g.log_z1(betas)
        assert np.all(np.diff(vals) < 0)

    def test_increasing_in_inverse_frequency(self):
        beta = 0.8
        z_soft = TrapGeometry((0.5,)).log_z1(beta)
        z_stiff = TrapGeometry((2.0,)).log_z1(beta)
        assert z_soft > z_stiff


class TestCharacteristicTemperature:
    def test_1d(self):
        # direct high-precision evaluation of N/ln(2N)
        tc = characteristic_temperature(TrapGeometry.isotropic(1), 1000)
        assert tc == pytest.approx(131.56332492395188, rel=1e-12)

    def test_3d(self):
        tc = characteristic_temperature(TrapGeometry.isotropic(3), 1000)
        assert tc == pytest.approx(9.4049897025704055, rel=1e-12)

    def test_2d_formula_inversion(self):
        g = TrapGeometry.isotropic(2)
        tc = characteristic_temperature(g, 1000)
        # invert: T_c^2 * zeta(2) recovers N
        assert tc**2 * float(zeta(2)) == pytest.approx(1000.0, rel=1e-13)

    def test_anisotropic_uses_geometric_mean(self):
        iso = characteristic_temperature(TrapGeometry.isotropic(3), 500)
        squeezed = characteristic_temperature(TrapGeometry((10.0, 1.0, 0.1)), 500)
        assert squeezed == pytest.approx(iso, rel=1e-13)

    def test_too_few_atoms(self):
        with pytest.raises(ValueError):
            characteristic_temperature(TrapGeometry.isotropic(1), 1)


class TestFiniteSpectrum:
    def test_log_z1(self):
        fs = FiniteSpectrum((0.0, 1.0))
        beta = math.log(2.0)
        assert math.exp(fs.log_z1(beta)) == pytest.approx(1.5, rel=1e-14)

    def test_validation(self):
        with pytest.raises(ValueError):
            FiniteSpectrum(())
        with pytest.raises(ValueError):
            FiniteSpectrum((-0.5, 1.0))
