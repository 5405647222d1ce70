import math

import numpy as np
import pytest

from spinner_lattice.lattice_geometry import (
    BlochVector,
    Flavor,
    LatticeSpec,
    bloch_phase,
    cell_basis,
    fractional_coordinates,
    reciprocal_basis,
    reciprocal_cell_samples,
    window_samples,
)


class TestLatticeSpec:
    def test_defaults(self):
        spec = LatticeSpec()
        assert (spec.l, spec.c, spec.m, spec.alpha) == (1.0, 1.0, 1.0, 0.0)
        assert spec.flavor == Flavor.MONATOMIC

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"l": 0.0},
            {"c": -1.0},
            {"m1": 0.0, "m2": 0.0},
            {"alpha1": math.inf, "alpha2": math.inf},
            {"m1": 1.0, "m2": 2.0},
        ],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            LatticeSpec(**kwargs)

    def test_biatomic_shares_alpha(self):
        spec = LatticeSpec.biatomic(1.0, 10.0, alpha1=0.5)
        assert spec.alpha2 == 0.5
        assert spec.flavor == Flavor.BIATOMIC

    def test_from_config_aliases(self):
        spec = LatticeSpec.from_config({"flavor": "biatomic", "m": 2.0, "m2": 10.0, "alpha": 0.3})
        assert (spec.m1, spec.m2, spec.alpha1, spec.alpha2) == (2.0, 10.0, 0.3, 0.3)

    def test_from_config_monatomic_m1_only(self):
        spec = LatticeSpec.from_config({"m1": 3.0, "alpha1": 0.5})
        assert (spec.m1, spec.m2, spec.alpha1, spec.alpha2) == (3.0, 3.0, 0.5, 0.5)

    def test_with_alpha(self):
        spec = LatticeSpec.biatomic(1.0, 10.0).with_alpha(5.0)
        assert (spec.alpha1, spec.alpha2, spec.m2) == (5.0, 5.0, 10.0)


class TestReciprocalCell:
    @pytest.mark.parametrize("flavor", [Flavor.MONATOMIC, Flavor.BIATOMIC])
    def test_dual_basis(self, flavor):
        spec = LatticeSpec(l=1.3, flavor=flavor)
        cell = cell_basis(spec).cell_matrix(flavor)
        b1, b2 = reciprocal_basis(spec)
        dual = np.array([b1, b2]) @ cell
        assert np.allclose(dual, 2.0 * math.pi * np.eye(2), atol=1e-12)

    def test_samples_include_origin(self):
        spec = LatticeSpec()
        samples = reciprocal_cell_samples(spec, 16)
        assert len(samples) == 256
        assert min(math.hypot(k.k1, k.k2) for k in samples) == 0.0

    def test_samples_are_distinct_modulo_lattice(self):
        spec = LatticeSpec.biatomic(1.0, 2.0)
        fractions = {
            tuple(np.round(np.mod(fractional_coordinates(spec, k), 1.0), 9) % 1.0)
            for k in reciprocal_cell_samples(spec, 8)
        }
        assert len(fractions) == 64

    def test_low_resolution_rejected(self):
        with pytest.raises(ValueError):
            reciprocal_cell_samples(LatticeSpec(), 1)

    def test_window_endpoints(self):
        samples = window_samples(LatticeSpec(l=2.0), (-1.0, 1.0), (0.0, 0.5), 3)
        assert samples[0].scaled(2.0) == pytest.approx((-1.0, 0.0))
        assert samples[-1].scaled(2.0) == pytest.approx((1.0, 0.5))
        assert samples[1].scaled(2.0) == pytest.approx((-1.0, 0.25))


class TestBlochPhase:
    def test_unit_modulus_and_periodicity(self):
        spec = LatticeSpec()
        basis = cell_basis(spec)
        b1, _ = reciprocal_basis(spec)
        k = BlochVector(0.37, -1.2)
        shifted = k + BlochVector(*b1)
        for n in [(1, 0), (0, 1), (-2, 3)]:
            phase = bloch_phase(k, n, basis)
            assert abs(phase) == pytest.approx(1.0)
            assert bloch_phase(shifted, n, basis) == pytest.approx(phase, abs=1e-12)

    def test_biatomic_translation(self):
        spec = LatticeSpec.biatomic(1.0, 1.0)
        basis = cell_basis(spec)
        k = BlochVector(0.5, 0.0)
        assert bloch_phase(k, (1, 0), basis, Flavor.BIATOMIC) == pytest.approx(np.exp(1j))

    def test_bloch_vector_arithmetic(self):
        k = BlochVector.from_scaled(1.0, 2.0, l=2.0)
        assert (k.k1, k.k2) == (0.5, 1.0)
        assert -k == BlochVector(-0.5, -1.0)
        with pytest.raises(ValueError):
            BlochVector(math.nan, 0.0)
