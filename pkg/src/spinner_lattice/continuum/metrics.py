import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from .scene import ContinuumScene, SceneError
from .solver import ComplexField

_DEFAULT_PROFILE_SAMPLES = 512
_DEFAULT_HALF_ANGLE = 30.0
_COMPONENTS = ("u1", "u2", "longitudinal", "transverse")


def field_amplitude(f: ComplexField) -> np.ndarray:
    return np.sqrt(np.abs(f.u1) ** 2 + np.abs(f.u2) ** 2)


def _grid_positions(f: ComplexField, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.vstack([(np.asarray(y) - f.origin) / f.spacing, (np.asarray(x) - f.origin) / f.spacing])


def sample_grid(f: ComplexField, grid: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of a real or complex node grid at points (x, y)."""
    positions = _grid_positions(f, x, y)
    if np.iscomplexobj(grid):
        real = ndimage.map_coordinates(grid.real, positions, order=1, mode="nearest")
        imag = ndimage.map_coordinates(grid.imag, positions, order=1, mode="nearest")
        return real + 1j * imag
    return ndimage.map_coordinates(grid, positions, order=1, mode="nearest")


def line_samples(
    f: ComplexField,
    x: np.ndarray,
    y: np.ndarray,
    component: str = "u1",
    direction: Tuple[float, float] = (1.0, 0.0),
) -> np.ndarray:
    """
    Complex displacement component at points (x, y).

    ``longitudinal`` projects onto ``direction`` and ``transverse`` onto its left normal.
    """
    if component not in _COMPONENTS:
        raise ValueError(f"Unknown component '{component}'. Expected one of {_COMPONENTS}")
    u1 = sample_grid(f, f.u1, x, y)
    u2 = sample_grid(f, f.u2, x, y)
    if component == "u1":
        return u1
    if component == "u2":
        return u2
    dx, dy = direction
    norm = math.hypot(dx, dy)
    dx, dy = dx / norm, dy / norm
    if component == "longitudinal":
        return u1 * dx + u2 * dy
    return -u1 * dy + u2 * dx


def diagonal_points(f: ComplexField, samples: int = _DEFAULT_PROFILE_SAMPLES):
    """Uniform points on the interior anti-diagonal, from the upper left to the lower right corner."""
    if samples < 2:
        raise ValueError(f"A profile needs at least 2 samples. Received: {samples}")
    t = np.linspace(0.0, 1.0, int(samples))
    x = -f.half_width + 2.0 * f.half_width * t
    y = f.half_width - 2.0 * f.half_width * t
    return x, y


def diagonal_profile(f: ComplexField, samples: int = _DEFAULT_PROFILE_SAMPLES) -> np.ndarray:
    if f.u1.shape[0] != f.u1.shape[1]:
        raise ValueError(f"Diagonal profile needs a square grid. Received: {f.u1.shape}")
    x, y = diagonal_points(f, samples)
    return sample_grid(f, field_amplitude(f), x, y)


@dataclass(frozen=True)
class ShadowSector:
    """
    Angular wedge centered on ``direction`` (pointing away from the source) around ``center``,
    spanning radii [r_min, r_max].
    """

    center: Tuple[float, float]
    direction: Tuple[float, float]
    half_angle: float = _DEFAULT_HALF_ANGLE
    r_min: float = 0.0
    r_max: float = 1.0

    def __post_init__(self):
        if not 0 < self.half_angle < 180:
            raise ValueError(f"half_angle must lie in (0, 180) degrees. Received: {self.half_angle}")
        if not 0 <= self.r_min < self.r_max:
            raise ValueError(f"Sector needs 0 <= r_min < r_max. Received: ({self.r_min}, {self.r_max})")
        norm = math.hypot(*self.direction)
        if norm == 0:
            raise ValueError("Sector direction must be nonzero")
        object.__setattr__(self, "direction", (self.direction[0] / norm, self.direction[1] / norm))

    @classmethod
    def from_scene(cls, scene: ContinuumScene, half_angle: float = _DEFAULT_HALF_ANGLE) -> "ShadowSector":
        """The region behind the scene's inclusion as seen from its source, radii [r_outer, 3 r_outer]."""
        if scene.inclusion is None:
            raise SceneError("A default shadow sector needs an inclusion in the scene")
        inclusion = scene.inclusion
        direction = (
            inclusion.center[0] - scene.source.position[0],
            inclusion.center[1] - scene.source.position[1],
        )
        if math.hypot(*direction) == 0:
            direction = inclusion.symmetry_axis
        return cls(
            center=inclusion.center,
            direction=direction,
            half_angle=half_angle,
            r_min=inclusion.r_outer,
            r_max=3.0 * inclusion.r_outer,
        )

    def contains(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        dx = np.asarray(x) - self.center[0]
        dy = np.asarray(y) - self.center[1]
        radius = np.hypot(dx, dy)
        along = dx * self.direction[0] + dy * self.direction[1]
        cosine = np.divide(along, radius, out=np.zeros_like(radius), where=radius > 0)
        return (
            (radius >= self.r_min)
            & (radius <= self.r_max)
            & (cosine >= math.cos(math.radians(self.half_angle)))
        )

    def outline(self, points: int = 64) -> Tuple[np.ndarray, np.ndarray]:
        heading = math.atan2(self.direction[1], self.direction[0])
        spread = math.radians(self.half_angle)
        angles = heading + np.linspace(-spread, spread, points)
        radii = np.concatenate([np.full(points, self.r_max), np.full(points, self.r_min)])
        angles = np.concatenate([angles, angles])
        return self.center[0] + radii * np.cos(angles), self.center[1] + radii * np.sin(angles)


def shadow_metric(
    f: ComplexField, scene: ContinuumScene, sector: Optional[ShadowSector] = None
) -> float:
    """
    RMS amplitude over the grid nodes of a sector behind the inclusion.

    Raises:
        SceneError: If the sector reaches into the PML.
    """
    sector = sector or ShadowSector.from_scene(scene)
    x_outline, y_outline = sector.outline()
    limit = scene.half_width * (1.0 + 1e-12)
    if np.any(np.abs(x_outline) > limit) or np.any(np.abs(y_outline) > limit):
        raise SceneError(
            f"Shadow sector up to radius {sector.r_max:.6g} intersects the PML "
            f"(interior half width {scene.half_width:.6g})"
        )
    grid_x, grid_y = np.meshgrid(f.coordinates, f.coordinates)
    mask = sector.contains(grid_x, grid_y) & scene.interior_mask()
    if not np.any(mask):
        raise SceneError("Shadow sector contains no grid node")
    amplitude = field_amplitude(f)[mask]
    return float(np.sqrt(np.mean(amplitude**2)))


def mirror_asymmetry(
    f: ComplexField,
    scene: ContinuumScene,
    point: Tuple[float, float],
    direction: Tuple[float, float],
) -> float:
    """
    Relative L2 difference between |U| and |U| reflected about the line through ``point`` along
    ``direction``, over interior nodes whose mirror image is also interior.
    """
    dx, dy = direction
    norm = math.hypot(dx, dy)
    dx, dy = dx / norm, dy / norm
    grid_x, grid_y = np.meshgrid(f.coordinates, f.coordinates)
    rel_x, rel_y = grid_x - point[0], grid_y - point[1]
    along = rel_x * dx + rel_y * dy
    mirror_x = point[0] + 2.0 * along * dx - rel_x
    mirror_y = point[1] + 2.0 * along * dy - rel_y
    limit = scene.half_width * (1.0 + 1e-12)
    mask = (
        scene.interior_mask()
        & (np.abs(mirror_x) <= limit)
        & (np.abs(mirror_y) <= limit)
    )
    amplitude = field_amplitude(f)
    original = amplitude[mask]
    mirrored = sample_grid(f, amplitude, mirror_x[mask], mirror_y[mask])
    reference = np.linalg.norm(original)
    if reference == 0:
        return 0.0
    return float(np.linalg.norm(original - mirrored) / reference)


def radial_wavelength(
    f: ComplexField,
    center: Tuple[float, float],
    direction: Tuple[float, float],
    r_range: Tuple[float, float],
    component: str = "transverse",
    samples: int = 256,
) -> float:
    """
    Wavelength along a ray from the slope of the unwrapped phase of a displacement component.
    """
    if not 0 <= r_range[0] < r_range[1]:
        raise ValueError(f"Radial range must satisfy 0 <= r0 < r1. Received: {r_range}")
    norm = math.hypot(*direction)
    unit = (direction[0] / norm, direction[1] / norm)
    radii = np.linspace(r_range[0], r_range[1], samples)
    values = line_samples(
        f, center[0] + radii * unit[0], center[1] + radii * unit[1], component, unit
    )
    phase = np.unwrap(np.angle(values))
    slope = np.polyfit(radii, phase, 1)[0]
    if slope == 0:
        raise ValueError("Phase is constant along the ray; no wavelength can be measured")
    return float(2.0 * math.pi / abs(slope))


def dominant_wavenumber(samples: np.ndarray, spacing: float, padding: int = 8) -> float:
    """Wavenumber of the strongest nonzero spatial frequency of a uniformly sampled profile."""
    samples = np.asarray(samples)
    if samples.size < 4:
        raise ValueError(f"At least 4 samples are needed. Received: {samples.size}")
    centered = samples - np.mean(samples)
    size = padding * samples.size
    spectrum = np.abs(np.fft.fft(centered * np.hanning(samples.size), n=size))
    wavenumbers = 2.0 * math.pi * np.fft.fftfreq(size, d=spacing)
    spectrum[0] = 0.0
    return float(abs(wavenumbers[int(np.argmax(spectrum))]))


def angular_variation(
    f: ComplexField, center: Tuple[float, float], radius: float, angles: int = 360
) -> float:
    """max |A - mean(A)| / mean(A) of the amplitude A on a circle."""
    theta = np.linspace(0.0, 2.0 * math.pi, angles, endpoint=False)
    values = sample_grid(
        f, field_amplitude(f), center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)
    )
    mean = float(np.mean(values))
    if mean == 0:
        return 0.0
    return float(np.max(np.abs(values - mean)) / mean)


def profile_deviation(
    f: ComplexField,
    reference: ComplexField,
    scene: ContinuumScene,
    samples: int = _DEFAULT_PROFILE_SAMPLES,
) -> float:
    """
    Relative RMS deviation between two diagonal profiles over the part that lies behind the
    inclusion, i.e. beyond its coating radius along the symmetry axis.
    """
    if scene.inclusion is None:
        raise SceneError("Profile deviation behind an inclusion needs an inclusion in the scene")
    inclusion = scene.inclusion
    x, y = diagonal_points(f, samples)
    along = (x - inclusion.center[0]) * inclusion.symmetry_axis[0] + (
        y - inclusion.center[1]
    ) * inclusion.symmetry_axis[1]
    behind = along >= inclusion.r_outer
    if not np.any(behind):
        raise SceneError("The diagonal has no samples behind the inclusion")
    profile = diagonal_profile(f, samples)[behind]
    baseline = diagonal_profile(reference, samples)[behind]
    scale = np.sqrt(np.mean(baseline**2))
    return float(np.sqrt(np.mean((profile - baseline) ** 2)) / scale)
