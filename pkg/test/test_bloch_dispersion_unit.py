import logging
import math

import numpy as np
import pytest
import scipy.linalg

from conftest import assert_omegas, random_bloch_vectors
from spinner_lattice import bloch_dispersion
from spinner_lattice.bloch_dispersion import (
    DispersionAssemblyError,
    Regime,
    bloch_dispersion as solve_branches,
    classify_regime,
    compare_with_scan,
    dispersion_det_scan,
    dispersion_mono,
    equivalent_scalar_ratio,
    expected_branch_count,
    inertia,
    lowfreq_mono,
    scalar_lattice_dispersion,
    stiffness,
    stiffness_bi,
    stiffness_bond_sum,
    stiffness_mono,
)
from spinner_lattice.lattice_geometry import BlochVector, LatticeSpec
from test_utils import get_test_ids, get_tests

_SQRT3 = math.sqrt(3.0)
_K_CORNER = BlochVector(math.pi, math.pi / _SQRT3)


def _rotate(k: BlochVector, degrees: float) -> BlochVector:
    angle = math.radians(degrees)
    return BlochVector(
        k.k1 * math.cos(angle) - k.k2 * math.sin(angle),
        k.k1 * math.sin(angle) + k.k2 * math.cos(angle),
    )


def _polar(radius: float, degrees: float) -> BlochVector:
    return BlochVector(radius * math.cos(math.radians(degrees)), radius * math.sin(math.radians(degrees)))


class TestStiffness:
    def test_mono_origin_is_zero(self):
        assert np.array_equal(stiffness_mono(BlochVector(0.0, 0.0), LatticeSpec()), np.zeros((2, 2)))

    def test_mono_corner_value(self):
        expected = np.array([[5.0, _SQRT3], [_SQRT3, 3.0]])
        assert np.allclose(stiffness_mono(_K_CORNER, LatticeSpec()), expected, atol=1e-12)

    def test_mono_even_in_k(self):
        spec = LatticeSpec()
        for k in random_bloch_vectors(spec, 10):
            assert np.allclose(stiffness_mono(k, spec), stiffness_mono(-k, spec), atol=1e-14)

    def test_bond_sum_matches_mono(self):
        spec = LatticeSpec(c=1.7, l=0.8)
        for k in random_bloch_vectors(spec, 100, seed=1):
            deviation = np.max(np.abs(stiffness_bond_sum(k, spec) - stiffness_mono(k, spec)))
            assert deviation <= 1e-12

    def test_bi_origin_blocks(self):
        spec = LatticeSpec.biatomic(1.0, 10.0)
        matrix = stiffness_bi(BlochVector(0.0, 0.0), spec)
        c11 = np.array([[2.5, -_SQRT3 / 2.0], [-_SQRT3 / 2.0, 1.5]])
        assert np.allclose(matrix[:2, :2], c11, atol=1e-14)
        assert np.allclose(matrix[2:, 2:], c11, atol=1e-14)
        assert np.allclose(matrix[2:, :2], -c11, atol=1e-14)
        eigenvalues = np.linalg.eigvalsh(matrix)
        assert np.allclose(eigenvalues[:2], 0.0, atol=1e-12)
        assert np.all(eigenvalues[2:] > 1.0)

    def test_bond_sum_rigid_translation_is_force_free(self):
        spec = LatticeSpec.biatomic(1.0, 10.0)
        matrix = stiffness_bond_sum(BlochVector(0.0, 0.0), spec)
        for translation in ([1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]):
            assert np.allclose(matrix @ np.array(translation), 0.0, atol=1e-14)

    def test_bi_printed_blocks_match_bond_sum(self):
        spec = LatticeSpec.biatomic(1.0, 10.0, alpha1=0.5)
        for k in random_bloch_vectors(spec, 100, seed=2):
            printed = stiffness_bi(k, spec)
            assert np.max(np.abs(printed - printed.conj().T)) <= 1e-12
            assert np.max(np.abs(printed - stiffness_bond_sum(k, spec))) <= 1e-12

    def test_mismatch_falls_back_to_bond_sum(self, monkeypatch, caplog):
        spec = LatticeSpec.biatomic(1.0, 2.0)
        k = BlochVector(0.4, 0.9)
        monkeypatch.setattr(bloch_dispersion, "stiffness_bi", lambda k, spec: np.zeros((4, 4)))
        with caplog.at_level(logging.WARNING):
            matrix = stiffness(k, spec)
        assert np.allclose(matrix, stiffness_bond_sum(k, spec))
        assert "bond-sum" in caplog.text


class TestInertia:
    def test_nonchiral_pencil_is_mass(self):
        matrices = inertia(LatticeSpec())
        assert np.array_equal(matrices.Sigma, np.zeros((2, 2)))
        assert np.array_equal(matrices.pencil, np.eye(2))

    def test_monatomic_eigenvalues(self):
        pencil = inertia(LatticeSpec.monatomic(alpha=0.5)).pencil
        assert np.allclose(np.linalg.eigvalsh(pencil), [0.5, 1.5])

    def test_biatomic_eigenvalues(self):
        pencil = inertia(LatticeSpec.biatomic(1.0, 10.0, alpha1=2.0)).pencil
        assert np.allclose(np.linalg.eigvalsh(pencil), [-1.0, 3.0, 8.0, 12.0])

    def test_chiral_term_is_rotation(self):
        alpha = 0.7
        pencil = inertia(LatticeSpec.monatomic(alpha=alpha)).pencil
        rotation = np.array([[0.0, 1.0], [-1.0, 0.0]])
        assert np.allclose(pencil, np.eye(2) + 1j * alpha * rotation)


class TestRegimes:
    @pytest.mark.parametrize(
        "test", get_tests("dispersion_cases.jsonl"), ids=get_test_ids("dispersion_cases.jsonl")
    )
    def test_branch_count(self, test):
        spec = LatticeSpec.from_config(test["lattice"])
        assert classify_regime(spec) == Regime(test["regime"])
        assert expected_branch_count(spec) == test["count"]
        total = 2 if spec.flavor.value == "monatomic" else 4
        for k in random_bloch_vectors(spec, 20, seed=3):
            branches = solve_branches(k, spec)
            assert branches.count == test["count"]
            assert branches.count + branches.discarded == total
            assert list(branches.omegas) == sorted(branches.omegas)
            assert all(w > 0 for w in branches.omegas)

    def test_critical_tolerance_band(self):
        assert classify_regime(LatticeSpec.monatomic(alpha=1.0 + 1e-14)) == Regime.CRITICAL
        assert classify_regime(LatticeSpec.monatomic(alpha=1.0 + 1e-6)) == Regime.SUPERCRITICAL


class TestMonatomicDispersion:
    def test_corner_frequencies(self):
        assert_omegas(dispersion_mono(_K_CORNER, LatticeSpec()).omegas, [math.sqrt(2.0), math.sqrt(6.0)])

    def test_critical_degenerate_root(self):
        spec = LatticeSpec.monatomic(alpha=1.0)
        branches = dispersion_mono(_K_CORNER, spec)
        matrix = stiffness_mono(_K_CORNER, spec)
        expected = math.sqrt(np.linalg.det(matrix) / np.trace(matrix))
        assert branches.regime == Regime.CRITICAL
        assert branches.count == 1
        assert abs(branches.omegas[0] - math.sqrt(1.5)) <= 1e-10
        assert abs(branches.omegas[0] - expected) <= 1e-10

    @pytest.mark.parametrize("direction", [0.0, 45.0, 100.0])
    def test_long_wave_ratio(self, direction):
        branches = dispersion_mono(_polar(1e-3, direction), LatticeSpec())
        lower, upper = branches.omegas
        assert upper / lower == pytest.approx(_SQRT3, rel=1e-3)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 0.999, 1.0, 2.0])
    @pytest.mark.parametrize("direction", [45.0, 200.0])
    def test_long_wave_asymptotics(self, alpha, direction):
        spec = LatticeSpec.monatomic(alpha=alpha)
        k = _polar(0.01, direction)
        omega_1, omega_2 = lowfreq_mono(k, spec)
        omegas = dispersion_mono(k, spec).omegas
        assert omega_1 == pytest.approx(omegas[0], rel=1e-2)
        if alpha < 1.0:
            assert omega_2 == pytest.approx(omegas[1], rel=1e-2)
        else:
            assert omega_2 is None
            assert len(omegas) == 1

    def test_lowfreq_example_value(self):
        omega_1, _ = lowfreq_mono(BlochVector(0.01, 0.01), LatticeSpec.monatomic(alpha=0.5))
        assert omega_1 == pytest.approx(8.2286e-3, rel=1e-4)

    def test_lowfreq_critical_coefficient(self):
        k = BlochVector(0.01, 0.0)
        omega_1, _ = lowfreq_mono(k, LatticeSpec.monatomic(alpha=1.0))
        assert omega_1**2 == pytest.approx(9.0 / 32.0 * 1e-4, rel=1e-12)
        below, _ = lowfreq_mono(k, LatticeSpec.monatomic(alpha=1.0 - 1e-9))
        assert below == pytest.approx(omega_1, rel=1e-8)

    def test_supercritical_root_product_is_negative(self):
        spec = LatticeSpec.monatomic(alpha=2.0)
        for k in random_bloch_vectors(spec, 10, seed=4):
            matrix = stiffness_mono(k, spec)
            assert np.linalg.det(matrix) / (spec.m**2 - spec.alpha**2) < 0
            assert dispersion_mono(k, spec).discarded == 1

    def test_monotonic_in_alpha(self):
        k = BlochVector(math.pi / 2.0, math.pi / 2.0)
        sheets = [dispersion_mono(k, LatticeSpec.monatomic(alpha=a)).omegas for a in np.linspace(0.0, 0.95, 20)]
        lower = np.array([s[0] for s in sheets])
        upper = np.array([s[1] for s in sheets])
        assert np.all(np.diff(upper) >= -1e-12)
        assert np.all(np.diff(lower) <= 1e-12)

    def test_six_fold_symmetry(self):
        spec = LatticeSpec.monatomic(alpha=0.5)
        for k in random_bloch_vectors(spec, 20, seed=5):
            reference = dispersion_mono(k, spec).omegas
            for degrees in (60.0, 120.0, 180.0, 300.0):
                assert_omegas(dispersion_mono(_rotate(k, degrees), spec).omegas, reference)

    def test_handedness_and_evenness(self):
        for k in random_bloch_vectors(LatticeSpec(), 20, seed=6):
            reference = dispersion_mono(k, LatticeSpec.monatomic(alpha=0.6)).omegas
            assert_omegas(dispersion_mono(k, LatticeSpec.monatomic(alpha=-0.6)).omegas, reference)
            assert_omegas(dispersion_mono(-k, LatticeSpec.monatomic(alpha=0.6)).omegas, reference)

    @pytest.mark.parametrize("alpha, zeros, discarded", [(0.5, 2, 0), (1.0, 1, 1), (2.0, 1, 1)])
    def test_origin(self, alpha, zeros, discarded):
        branches = dispersion_mono(BlochVector(0.0, 0.0), LatticeSpec.monatomic(alpha=alpha))
        assert branches.omegas == (0.0,) * zeros
        assert branches.discarded == discarded

    def test_rejects_biatomic(self):
        with pytest.raises(ValueError):
            dispersion_mono(_K_CORNER, LatticeSpec.biatomic(1.0, 2.0))
        with pytest.raises(ValueError):
            lowfreq_mono(_K_CORNER, LatticeSpec.biatomic(1.0, 2.0))


class TestBiatomicDispersion:
    def test_origin_has_two_acoustic_zeros(self):
        branches = solve_branches(BlochVector(0.0, 0.0), LatticeSpec.biatomic(1.0, 10.0, alpha1=0.5))
        assert branches.count == 4
        assert branches.omegas[:2] == (0.0, 0.0)
        assert branches.omegas[2] > 0

    def test_equal_masses_contain_monatomic_branches(self):
        mono = LatticeSpec.monatomic(alpha=0.5)
        bi = LatticeSpec.biatomic(1.0, 1.0, alpha1=0.5)
        for k in random_bloch_vectors(bi, 20, seed=7):
            folded = np.array(solve_branches(k, bi).omegas)
            for omega in dispersion_mono(k, mono).omegas:
                assert np.min(np.abs(folded - omega)) <= 1e-9

    def test_handedness_pairs_with_k_reversal(self):
        for k in random_bloch_vectors(LatticeSpec.biatomic(1.0, 10.0), 20, seed=8):
            reference = solve_branches(k, LatticeSpec.biatomic(1.0, 10.0, alpha1=5.0)).omegas
            flipped = solve_branches(-k, LatticeSpec.biatomic(1.0, 10.0, alpha1=-5.0)).omegas
            assert_omegas(flipped, reference)

    def test_non_hermitian_stiffness_is_reported(self, monkeypatch):
        spec = LatticeSpec.biatomic(1.0, 10.0)
        broken = np.triu(np.ones((4, 4))).astype(complex)
        monkeypatch.setattr(bloch_dispersion, "stiffness", lambda k, spec: broken)
        with pytest.raises(DispersionAssemblyError) as e:
            solve_branches(BlochVector(0.3, 0.2), spec)
        assert e.value.diagnostics["residual"] == pytest.approx(1.0)

    def test_complex_roots_are_reported(self, monkeypatch):
        spec = LatticeSpec.biatomic(1.0, 10.0, alpha1=5.0)
        monkeypatch.setattr(
            scipy.linalg, "eigvals", lambda a, b: np.array([1.0 + 0.5j, 2.0, 3.0, np.inf])
        )
        with pytest.raises(DispersionAssemblyError) as e:
            solve_branches(BlochVector(0.0, 0.0), spec)
        assert e.value.diagnostics["imaginary"] == pytest.approx(0.5)


class TestDeterminantScan:
    @pytest.mark.parametrize(
        "spec",
        [
            LatticeSpec.monatomic(alpha=0.0),
            LatticeSpec.monatomic(alpha=0.5),
            LatticeSpec.monatomic(alpha=1.0),
            LatticeSpec.monatomic(alpha=2.0),
            LatticeSpec.biatomic(1.0, 10.0, alpha1=0.5),
            LatticeSpec.biatomic(1.0, 10.0, alpha1=1.0),
            LatticeSpec.biatomic(1.0, 10.0, alpha1=5.0),
            LatticeSpec.biatomic(1.0, 10.0, alpha1=12.0),
        ],
        ids=["mono_0", "mono_sub", "mono_crit", "mono_super", "bi_sub", "bi_crit", "bi_inter", "bi_super"],
    )
    def test_agrees_with_solver(self, spec):
        for k in random_bloch_vectors(spec, 50, seed=9):
            omega_max = 1.5 * max(solve_branches(k, spec).omegas) + 1.0
            comparison = compare_with_scan(k, spec, omega_max, n_steps=10000)
            assert comparison["counts_agree"], comparison
            assert comparison["max_deviation"] <= 1e-8, comparison

    def test_origin_root(self):
        roots = dispersion_det_scan(BlochVector(0.0, 0.0), LatticeSpec.monatomic(alpha=0.5), 5.0, 100)
        assert roots == [0.0]

    @pytest.mark.parametrize("omega_max, n_steps", [(0.0, 1000), (-1.0, 1000), (5.0, 99)])
    def test_invalid_arguments(self, omega_max, n_steps):
        with pytest.raises(ValueError):
            dispersion_det_scan(_K_CORNER, LatticeSpec(), omega_max, n_steps)

    def test_warns_on_missing_roots(self, caplog):
        spec = LatticeSpec.monatomic(alpha=0.5)
        lowest = dispersion_mono(_K_CORNER, spec).omegas[0]
        with caplog.at_level(logging.WARNING):
            roots = dispersion_det_scan(_K_CORNER, spec, 0.5 * lowest, 200)
        assert roots == []
        assert "regime predicts 2" in caplog.text


class TestScalarLattice:
    def test_origin_and_period(self):
        assert scalar_lattice_dispersion(BlochVector(0.0, 0.0), 1.0, 1.0) == 0.0
        reciprocal = BlochVector(2.0 * math.pi, 2.0 * math.pi / _SQRT3)
        assert scalar_lattice_dispersion(reciprocal, 1.0, 1.0) == pytest.approx(0.0, abs=1e-7)

    def test_long_wave_limit(self):
        k = _polar(0.01, 30.0)
        expected = math.sqrt(1.5 * 2.0 / 3.0 * 1e-4)
        assert scalar_lattice_dispersion(k, 2.0, 3.0) == pytest.approx(expected, rel=5e-3)

    def test_invalid_constants(self):
        with pytest.raises(ValueError):
            scalar_lattice_dispersion(_K_CORNER, 0.0, 1.0)

    def test_ratio_values(self):
        assert equivalent_scalar_ratio(1.0, 0.0) == pytest.approx(0.25, rel=1e-14)
        assert equivalent_scalar_ratio(1.0, 2.0) == pytest.approx((math.sqrt(13.0) - 2.0) / 12.0, rel=1e-12)
        assert equivalent_scalar_ratio(2.0, -2.0, c=3.0) == pytest.approx(9.0 / 32.0, rel=1e-14)

    @pytest.mark.parametrize("alpha", [1.0 - 1e-4, 1.0 + 1e-4])
    def test_ratio_continuity(self, alpha):
        closed_form = (math.sqrt(1.0 + 3.0 * alpha**2) - 2.0) / (alpha**2 - 1.0) / 4.0
        assert equivalent_scalar_ratio(1.0, alpha) == pytest.approx(closed_form, abs=1e-6)
        assert equivalent_scalar_ratio(1.0, alpha) == pytest.approx(3.0 / 16.0, abs=1e-5)

    @pytest.mark.parametrize("radius", [0.005, 0.01, 0.02])
    @pytest.mark.parametrize("direction", [0.0, 75.0])
    def test_matches_vector_shear_branch(self, radius, direction):
        spec = LatticeSpec.monatomic(alpha=2.0)
        k = _polar(radius, direction)
        ratio = equivalent_scalar_ratio(spec.m, spec.alpha, spec.c)
        (shear,) = dispersion_mono(k, spec).omegas
        assert scalar_lattice_dispersion(k, ratio, 1.0) == pytest.approx(shear, rel=1e-2)
