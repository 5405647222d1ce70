from .medium import Medium, continuum_wavenumbers
from .metrics import (
    ShadowSector,
    angular_variation,
    diagonal_profile,
    dominant_wavenumber,
    field_amplitude,
    mirror_asymmetry,
    radial_wavelength,
    shadow_metric,
)
from .operator import assemble_operator, point_force_source, point_moment_source
from .reporting import scene_report, sweep_coating_alpha
from .scene import CoatedInclusion, ContinuumScene, SceneError, Source, SourceKind, build_scene
from .solver import ComplexField, SolverConvergenceError, solve
