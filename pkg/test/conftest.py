import math
from typing import List, Optional, Sequence

import numpy as np

from spinner_lattice.continuum import ComplexField, build_scene, solve
from spinner_lattice.lattice_geometry import BlochVector, LatticeSpec, reciprocal_basis


def random_bloch_vectors(spec: LatticeSpec, count: int, seed: int = 0) -> List[BlochVector]:
    """Generic Bloch vectors drawn uniformly from the reciprocal cell, away from k = 0."""
    rng = np.random.default_rng(seed)
    b1, b2 = reciprocal_basis(spec)
    result = []
    while len(result) < count:
        s1, s2 = rng.uniform(-0.5, 0.5, size=2)
        if math.hypot(s1, s2) > 0.02:
            result.append(BlochVector(*(s1 * b1 + s2 * b2)))
    return result


def assert_omegas(actual: Sequence[float], expected: Sequence[float], rel: float = 1e-10):
    assert len(actual) == len(expected)
    for a, e in zip(actual, expected):
        assert abs(a - e) <= rel * max(1.0, abs(e)), f"{list(actual)} != {list(expected)}"


def scene_config(
    size_wavelengths: float = 6.0,
    points_per_wavelength: float = 12.0,
    pml_cells: int = 20,
    medium: Optional[dict] = None,
    source: Optional[dict] = None,
    inclusion: Optional[dict] = None,
    coating: Optional[dict] = None,
) -> dict:
    return {
        "domain": {
            "size_wavelengths": size_wavelengths,
            "points_per_wavelength": points_per_wavelength,
            "pml_cells": pml_cells,
        },
        "medium": dict(medium or {}),
        "source": dict(source or {}),
        "inclusion": dict(inclusion or {}),
        "coating": dict(coating or {}),
    }


def solve_config(config: dict):
    scene = build_scene(config)
    return scene, solve(scene)


def interior_window(f: ComplexField, half_width: float) -> slice:
    """Index range of nodes with |coordinate| <= half_width."""
    inside = np.nonzero(np.abs(f.coordinates) <= half_width * (1.0 + 1e-12))[0]
    return slice(int(inside[0]), int(inside[-1]) + 1)
