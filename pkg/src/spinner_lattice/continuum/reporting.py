import copy
import logging
import math
from typing import List, Optional, Sequence

from ..sweep_utils import parallel_map
from .medium import continuum_wavenumbers
from .metrics import (
    ShadowSector,
    diagonal_points,
    dominant_wavenumber,
    line_samples,
    profile_deviation,
    shadow_metric,
)
from .scene import ContinuumScene, build_scene
from .solver import ComplexField, solve

_DEFAULT_PROFILE_SAMPLES = 512
_DEFAULT_HALF_ANGLE = 30.0


def scene_report(
    scene: ContinuumScene,
    f: ComplexField,
    profile_samples: int = _DEFAULT_PROFILE_SAMPLES,
    half_angle: float = _DEFAULT_HALF_ANGLE,
    reference: Optional[ComplexField] = None,
) -> dict:
    """
    Summary of a continuum solve.

    Returns:
        dict: solver residual and method, ambient wavelengths and plane-wave wavenumbers, the
            dominant wavenumber along the diagonal, and, for scenes with an inclusion, the shadow
            metric (plus the reference shadow and profile deviation when a homogeneous-medium
            reference field is given).
    """
    ambient = scene.ambient
    x, y = diagonal_points(f, profile_samples)
    diagonal_step = math.hypot(x[1] - x[0], y[1] - y[0])
    along_diagonal = line_samples(f, x, y, "longitudinal", (1.0, -1.0))
    report = {
        "omega": scene.omega,
        "spacing": scene.spacing,
        "nodes_per_side": scene.nodes_per_side,
        "residual": f.residual,
        "method": f.method,
        "shear_wavelength": ambient.shear_wavelength(scene.omega),
        "pressure_wavelength": ambient.pressure_wavelength(scene.omega),
        "plane_wavenumbers": continuum_wavenumbers(
            scene.omega, ambient.lam, ambient.mu, ambient.rho, ambient.alpha
        ),
        "diagonal_wavenumber": dominant_wavenumber(along_diagonal, diagonal_step),
    }
    if scene.inclusion is not None:
        sector = ShadowSector.from_scene(scene, half_angle)
        report["shadow_metric"] = shadow_metric(f, scene, sector)
        if reference is not None:
            report["shadow_reference"] = shadow_metric(reference, scene, sector)
            report["profile_deviation"] = profile_deviation(f, reference, scene, profile_samples)
    return report


def reference_config(config: dict) -> dict:
    """The same scene with the inclusion and its coating removed."""
    reference = copy.deepcopy(config)
    inclusion = config.get("inclusion", {})
    if inclusion.get("enabled"):
        source = reference.setdefault("source", {})
        scene = build_scene(config)
        for key, value in zip(["x", "y"], scene.source.position):
            source[key] = value
        for key, value in zip(["direction_x", "direction_y"], scene.source.direction):
            source[key] = value
    reference.setdefault("inclusion", {})["enabled"] = False
    reference.setdefault("coating", {})["enabled"] = False
    return reference


def sweep_coating_alpha(
    config: dict,
    alphas: Sequence[float],
    half_angle: float = _DEFAULT_HALF_ANGLE,
    threads: Optional[int] = None,
) -> List[dict]:
    """Solves the coated scene for every coating alpha and reports the shadow metric of each."""

    def _run(alpha: float) -> dict:
        scene_config = copy.deepcopy(config)
        scene_config.setdefault("inclusion", {})["enabled"] = True
        coating = scene_config.setdefault("coating", {})
        coating["enabled"] = True
        coating["alpha"] = float(alpha)
        scene = build_scene(scene_config)
        f = solve(scene)
        return {
            "alpha": float(alpha),
            "shadow_metric": shadow_metric(f, scene, ShadowSector.from_scene(scene, half_angle)),
            "residual": f.residual,
        }

    results = parallel_map(_run, list(alphas), threads)
    logging.info(f"Swept {len(results)} coating alphas")
    return results

