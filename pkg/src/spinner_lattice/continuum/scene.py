import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .medium import Medium, continuum_wavenumbers

_MIN_POINTS_PER_WAVELENGTH = 10.0
_DEFAULT_POINTS_PER_WAVELENGTH = 16.0
_DEFAULT_SIZE_WAVELENGTHS = 12.0
_DEFAULT_PML_CELLS = 20
_DEFAULT_PML_STRENGTH = 10.0
_DEFAULT_OMEGA = 10.0
_FULL_SCALE_OMEGA = 50.0
_DEFAULT_AXIS = (1.0, -1.0)


class SceneError(Exception):
    pass


class SourceKind(Enum):
    FORCE = "force"
    MOMENT = "moment"


def _unit(vector: Tuple[float, float], name: str) -> Tuple[float, float]:
    norm = math.hypot(vector[0], vector[1])
    if not (math.isfinite(norm) and norm > 0):
        raise ValueError(f"{name} must be a nonzero vector. Received: {vector}")
    return vector[0] / norm, vector[1] / norm


@dataclass(frozen=True)
class Source:
    """Time-harmonic point force (along ``direction``) or point moment at ``position``."""

    kind: SourceKind
    position: Tuple[float, float] = (0.0, 0.0)
    magnitude: float = 1.0
    direction: Tuple[float, float] = (1.0, 0.0)

    def __post_init__(self):
        if not math.isfinite(self.magnitude):
            raise ValueError(f"Source magnitude must be finite. Received: {self.magnitude}")
        object.__setattr__(self, "direction", _unit(self.direction, "Source direction"))


@dataclass(frozen=True)
class CoatedInclusion:
    """
    Stiff disc of radius r_inner optionally wrapped in a chiral annulus r_inner < r <= r_outer.

    The symmetry axis splits the annulus into two semi-rings carrying +coating_alpha (on the side
    where axis x (r - center) has the sign of ``positive_side``) and -coating_alpha; nodes on the
    axis get zero. The default -1 puts +coating_alpha on the right of the axis, seen
    from the source; the two choices are distinct scenes, not mirror images.
    """

    center: Tuple[float, float]
    r_inner: float
    r_outer: float
    inclusion_lambda: float = 23.0
    inclusion_mu: float = 12.0
    coating_alpha: float = 0.0
    symmetry_axis: Tuple[float, float] = _DEFAULT_AXIS
    coated: bool = True
    positive_side: int = -1

    def __post_init__(self):
        if not (0 < self.r_inner < self.r_outer):
            raise ValueError(
                f"Inclusion needs 0 < r_inner < r_outer. Received: ({self.r_inner}, {self.r_outer})"
            )
        if self.inclusion_mu <= 0:
            raise ValueError(f"Inclusion mu must be positive. Received: {self.inclusion_mu}")
        if self.positive_side not in (1, -1):
            raise ValueError(f"positive_side must be +1 or -1. Received: {self.positive_side}")
        object.__setattr__(self, "symmetry_axis", _unit(self.symmetry_axis, "Symmetry axis"))

    def side(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Sign (+1, -1 or 0) of axis x (r - center) times ``positive_side``."""
        ax, ay = self.symmetry_axis
        cross = ax * (y - self.center[1]) - ay * (x - self.center[0])
        return self.positive_side * np.sign(cross)


@dataclass(frozen=True, eq=False)
class ContinuumScene:
    """
    Rasterized chiral continuum on a square node grid centered at the origin.

    The interior holds nodes -n_half..n_half times ``spacing`` along each axis and is wrapped by
    ``pml_cells`` absorbing cells on every side. Coefficient grids are indexed [iy, ix].
    """

    spacing: float
    n_half: int
    pml_cells: int
    pml_strength: float
    omega: float
    ambient: Medium
    source: Source
    inclusion: Optional[CoatedInclusion]
    lambda_field: np.ndarray = field(repr=False)
    mu_field: np.ndarray = field(repr=False)
    rho_field: np.ndarray = field(repr=False)
    alpha_field: np.ndarray = field(repr=False)

    @property
    def nodes_per_side(self) -> int:
        return 2 * (self.n_half + self.pml_cells) + 1

    @property
    def coordinates(self) -> np.ndarray:
        return _coordinates(self.n_half, self.pml_cells, self.spacing)

    @property
    def half_width(self) -> float:
        return self.n_half * self.spacing

    @property
    def size(self) -> float:
        return 2.0 * self.half_width

    @property
    def pml_thickness(self) -> float:
        return self.pml_cells * self.spacing

    @property
    def shear_wavelength(self) -> float:
        return self.ambient.shear_wavelength(self.omega)

    def interior_mask(self) -> np.ndarray:
        inside = np.abs(self.coordinates) <= self.half_width * (1.0 + 1e-12)
        return np.outer(inside, inside)

    def node_index(self, x: float, y: float) -> Tuple[int, int]:
        """(iy, ix) of the node nearest to (x, y)."""
        offset = self.n_half + self.pml_cells
        return int(round(y / self.spacing)) + offset, int(round(x / self.spacing)) + offset


def _coordinates(n_half: int, pml_cells: int, spacing: float) -> np.ndarray:
    offset = n_half + pml_cells
    return (np.arange(2 * offset + 1) - offset) * spacing


def _get(section: dict, key: str, default):
    value = section.get(key)
    return default if value is None else value


def _inclusion_from_config(config: dict, wavelength: float) -> Optional[CoatedInclusion]:
    inclusion = config.get("inclusion", {})
    coating = config.get("coating", {})
    if not _get(inclusion, "enabled", False):
        if _get(coating, "enabled", False):
            raise SceneError("A coating requires an enabled inclusion")
        return None
    r_inner = float(_get(inclusion, "r_inner", wavelength))
    return CoatedInclusion(
        center=(float(_get(inclusion, "x", 0.0)), float(_get(inclusion, "y", 0.0))),
        r_inner=r_inner,
        r_outer=float(_get(coating, "r_outer", 1.5 * r_inner)),
        inclusion_lambda=float(_get(inclusion, "lambda", 23.0)),
        inclusion_mu=float(_get(inclusion, "mu", 12.0)),
        coating_alpha=float(_get(coating, "alpha", 0.0)),
        symmetry_axis=(
            float(_get(inclusion, "axis_x", _DEFAULT_AXIS[0])),
            float(_get(inclusion, "axis_y", _DEFAULT_AXIS[1])),
        ),
        coated=bool(_get(coating, "enabled", False)),
        positive_side=int(_get(coating, "positive_side", -1)),
    )


def _source_from_config(config: dict, inclusion: Optional[CoatedInclusion]) -> Source:
    source = config.get("source", {})
    if inclusion is None:
        default_position = (0.0, 0.0)
        default_direction = (1.0, 0.0)
    else:
        ax, ay = inclusion.symmetry_axis
        distance = 3.0 * inclusion.r_outer
        default_position = (
            inclusion.center[0] - distance * ax,
            inclusion.center[1] - distance * ay,
        )
        default_direction = (ax, ay)
    return Source(
        kind=SourceKind(str(_get(source, "kind", "force")).lower()),
        position=(
            float(_get(source, "x", default_position[0])),
            float(_get(source, "y", default_position[1])),
        ),
        magnitude=float(_get(source, "magnitude", 1.0)),
        direction=(
            float(_get(source, "direction_x", default_direction[0])),
            float(_get(source, "direction_y", default_direction[1])),
        ),
    )


def _rasterize(
    x: np.ndarray, ambient: Medium, inclusion: Optional[CoatedInclusion]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Coefficient grids in painter's order: ambient, inclusion disc, coating semi-rings."""
    grid_x, grid_y = np.meshgrid(x, x)
    lam = np.full(grid_x.shape, ambient.lam)
    mu = np.full(grid_x.shape, ambient.mu)
    rho = np.full(grid_x.shape, ambient.rho)
    alpha = np.full(grid_x.shape, ambient.alpha)
    if inclusion is None:
        return lam, mu, rho, alpha
    radius = np.hypot(grid_x - inclusion.center[0], grid_y - inclusion.center[1])
    disc = radius < inclusion.r_inner
    lam[disc] = inclusion.inclusion_lambda
    mu[disc] = inclusion.inclusion_mu
    rho[disc] = ambient.rho
    alpha[disc] = 0.0
    if inclusion.coated:
        ring = (radius > inclusion.r_inner) & (radius <= inclusion.r_outer)
        lam[ring] = ambient.lam
        mu[ring] = ambient.mu
        rho[ring] = ambient.rho
        alpha[ring] = inclusion.coating_alpha * inclusion.side(grid_x[ring], grid_y[ring])
    return lam, mu, rho, alpha


def _check_resolution(scene: ContinuumScene):
    wavelength = scene.shear_wavelength
    points = wavelength / scene.spacing
    if points < _MIN_POINTS_PER_WAVELENGTH * (1.0 - 1e-12):
        raise SceneError(
            f"Grid spacing {scene.spacing} resolves the shear wavelength {wavelength:.6g} with "
            f"{points:.2f} points; at least {_MIN_POINTS_PER_WAVELENGTH:g} are required"
        )
    alphas = {float(a) for a in np.unique(np.abs(scene.alpha_field))}
    for alpha in alphas:
        k_max = max(
            continuum_wavenumbers(
                scene.omega, scene.ambient.lam, scene.ambient.mu, scene.ambient.rho, alpha
            )
        )
        points = 2.0 * math.pi / k_max / scene.spacing
        if points < _MIN_POINTS_PER_WAVELENGTH:
            logging.warning(
                f"Chiral region with alpha={alpha:g} is resolved with only {points:.2f} points "
                f"per wavelength"
            )


def _check_geometry(scene: ContinuumScene):
    limit = scene.half_width
    inclusion = scene.inclusion
    if inclusion is not None:
        reach = max(abs(inclusion.center[0]), abs(inclusion.center[1])) + inclusion.r_outer
        if reach > limit:
            raise SceneError(
                f"Inclusion reaches {reach:.6g} from the center and overlaps the PML "
                f"(interior half width {limit:.6g})"
            )
    sx, sy = scene.source.position
    clearance = limit - max(abs(sx), abs(sy))
    if clearance < scene.shear_wavelength * (1.0 - 1e-9):
        raise SceneError(
            f"Source at ({sx:.6g}, {sy:.6g}) must lie at least one shear wavelength "
            f"({scene.shear_wavelength:.6g}) inside the interior"
        )
    if np.any(scene.mu_field <= 0) or np.any(scene.rho_field <= 0):
        raise SceneError("Scene has cells with nonpositive mu or rho")


def build_scene(config: dict) -> ContinuumScene:
    """
    Builds a rasterized scene from ``domain``, ``medium``, ``source``, ``inclusion`` and
    ``coating`` config sections.

    Lengths default to multiples of the ambient shear wavelength: a 12-wavelength domain with
    16 points per wavelength, inclusion radius 1, coating radius 1.5 times the inclusion radius,
    and the source 3 coating radii before the inclusion on its symmetry axis.

    Raises:
        SceneError: If the grid under-resolves the shear wavelength or a shape or the source
            is too close to the PML.
    """
    domain = config.get("domain", {})
    medium = config.get("medium", {})
    omega = (
        _FULL_SCALE_OMEGA
        if _get(domain, "full_scale", False)
        else float(_get(medium, "omega", _DEFAULT_OMEGA))
    )
    if not omega > 0:
        raise ValueError(f"omega must be positive. Received: {omega}")
    ambient = Medium.from_config(medium)
    wavelength = ambient.shear_wavelength(omega)
    spacing = float(
        _get(
            domain,
            "spacing",
            wavelength / float(_get(domain, "points_per_wavelength", _DEFAULT_POINTS_PER_WAVELENGTH)),
        )
    )
    if not spacing > 0:
        raise ValueError(f"Grid spacing must be positive. Received: {spacing}")
    size = float(
        _get(domain, "size", float(_get(domain, "size_wavelengths", _DEFAULT_SIZE_WAVELENGTHS)) * wavelength)
    )
    n_half = int(round(size / 2.0 / spacing))
    if n_half < 2:
        raise SceneError(f"Domain size {size} is too small for grid spacing {spacing}")
    pml_cells = int(_get(domain, "pml_cells", _DEFAULT_PML_CELLS))
    if pml_cells < 0:
        raise ValueError(f"pml_cells must not be negative. Received: {pml_cells}")
    inclusion = _inclusion_from_config(config, wavelength)
    source = _source_from_config(config, inclusion)
    coordinates = _coordinates(n_half, pml_cells, spacing)
    lam, mu, rho, alpha = _rasterize(coordinates, ambient, inclusion)
    scene = ContinuumScene(
        spacing=spacing,
        n_half=n_half,
        pml_cells=pml_cells,
        pml_strength=float(_get(domain, "pml_strength", _DEFAULT_PML_STRENGTH)),
        omega=omega,
        ambient=ambient,
        source=source,
        inclusion=inclusion,
        lambda_field=lam,
        mu_field=mu,
        rho_field=rho,
        alpha_field=alpha,
    )
    _check_resolution(scene)
    _check_geometry(scene)
    logging.info(
        f"Built a {scene.nodes_per_side}x{scene.nodes_per_side} scene with spacing {spacing:.6g}, "
        f"omega={omega:g}, {'an' if inclusion else 'no'} inclusion"
    )
    return scene
