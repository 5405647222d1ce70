import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import scipy.sparse

from .scene import ContinuumScene, SourceKind

_PML_ORDER = 3
_MOMENT_RING_RADIUS = 2


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Sparse complex system A U = b; unknowns are all u1 nodes followed by all u2 nodes."""

    matrix: scipy.sparse.csr_matrix
    rhs: np.ndarray
    scene: ContinuumScene

    @property
    def unknowns(self) -> int:
        return self.matrix.shape[0]


def pml_stretch(scene: ContinuumScene, coordinates: np.ndarray) -> np.ndarray:
    """
    Complex stretch factor s = 1 - i sigma / omega at the given coordinates.

    sigma grows as (d / delta)^3 with the depth d into a layer of thickness delta and peaks at
    strength (order + 1) c_p / (2 delta), giving a normal-incidence reflection of exp(-strength).
    """
    coordinates = np.asarray(coordinates, dtype=float)
    stretch = np.ones(coordinates.shape, dtype=complex)
    if scene.pml_cells == 0:
        return stretch
    thickness = scene.pml_thickness
    depth = np.clip(np.abs(coordinates) - scene.half_width, 0.0, None)
    sigma_max = scene.pml_strength * (_PML_ORDER + 1) * scene.ambient.pressure_speed / (2.0 * thickness)
    sigma = sigma_max * (depth / thickness) ** _PML_ORDER
    return stretch - 1j * sigma / scene.omega


def _harmonic(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return 2.0 * a * b / (a + b)


def _shifted(grid: np.ndarray, dy: int, dx: int) -> np.ndarray:
    """grid[iy + dy, ix + dx] with edge values repeated beyond the boundary."""
    padded = np.pad(grid, 1, mode="edge")
    n_y, n_x = grid.shape
    return padded[1 + dy : 1 + dy + n_y, 1 + dx : 1 + dx + n_x]


class _Stencil:
    """Collects COO triplets for couplings between node grids of two unknown blocks."""

    def __init__(self, n: int):
        self._n = n
        self._index = np.arange(n * n).reshape(n, n)
        self._rows: List[np.ndarray] = []
        self._cols: List[np.ndarray] = []
        self._values: List[np.ndarray] = []

    def couple(self, row_block: int, col_block: int, dy: int, dx: int, coefficient: np.ndarray):
        """Adds coefficient[iy, ix] at (node (iy, ix), node (iy + dy, ix + dx)); outside nodes are dropped."""
        n = self._n
        y_range = slice(max(0, -dy), min(n, n - dy))
        x_range = slice(max(0, -dx), min(n, n - dx))
        rows = self._index[y_range, x_range]
        cols = self._index[
            y_range.start + dy : y_range.stop + dy, x_range.start + dx : x_range.stop + dx
        ]
        values = np.broadcast_to(coefficient, (n, n))[y_range, x_range]
        offset = n * n
        self._rows.append(row_block * offset + rows.ravel())
        self._cols.append(col_block * offset + cols.ravel())
        self._values.append(np.asarray(values, dtype=complex).ravel())

    def matrix(self) -> scipy.sparse.csr_matrix:
        size = 2 * self._n * self._n
        return scipy.sparse.coo_matrix(
            (np.concatenate(self._values), (np.concatenate(self._rows), np.concatenate(self._cols))),
            shape=(size, size),
        ).tocsr()


def _add_flux_terms(
    stencil: _Stencil,
    block: int,
    x_coefficient: np.ndarray,
    y_coefficient: np.ndarray,
    s_x: Tuple[np.ndarray, np.ndarray],
    s_y: Tuple[np.ndarray, np.ndarray],
    h: float,
):
    """d/dx((s_y / s_x) a d/dx) + d/dy((s_x / s_y) b d/dy) in flux form with harmonic face values."""
    sx_nodes, sx_faces = s_x
    sy_nodes, sy_faces = s_y
    east = sy_nodes[:, None] / sx_faces[None, 1:] * _harmonic(x_coefficient, _shifted(x_coefficient, 0, 1))
    west = sy_nodes[:, None] / sx_faces[None, :-1] * _harmonic(x_coefficient, _shifted(x_coefficient, 0, -1))
    north = sx_nodes[None, :] / sy_faces[1:, None] * _harmonic(y_coefficient, _shifted(y_coefficient, 1, 0))
    south = sx_nodes[None, :] / sy_faces[:-1, None] * _harmonic(y_coefficient, _shifted(y_coefficient, -1, 0))
    scale = 1.0 / h**2
    stencil.couple(block, block, 0, 0, -(east + west + north + south) * scale)
    stencil.couple(block, block, 0, 1, east * scale)
    stencil.couple(block, block, 0, -1, west * scale)
    stencil.couple(block, block, 1, 0, north * scale)
    stencil.couple(block, block, -1, 0, south * scale)


def _add_mixed_terms(
    stencil: _Stencil,
    row_block: int,
    col_block: int,
    outer_x: np.ndarray,
    outer_y: np.ndarray,
    h: float,
):
    """d/dx(outer_x d/dy w) + d/dy(outer_y d/dx w) with central differences on the nodes."""
    scale = 1.0 / (4.0 * h**2)
    east, west = _shifted(outer_x, 0, 1), _shifted(outer_x, 0, -1)
    north, south = _shifted(outer_y, 1, 0), _shifted(outer_y, -1, 0)
    stencil.couple(row_block, col_block, 1, 1, (east + north) * scale)
    stencil.couple(row_block, col_block, -1, 1, -(east + south) * scale)
    stencil.couple(row_block, col_block, 1, -1, -(west + north) * scale)
    stencil.couple(row_block, col_block, -1, -1, (west + south) * scale)


def point_force_source(scene: ContinuumScene) -> Tuple[np.ndarray, np.ndarray]:
    """
    Force density grids (f1, f2) of the scene's point force, spread over the four surrounding
    nodes with bilinear weights.
    """
    source = scene.source
    n = scene.nodes_per_side
    h = scene.spacing
    origin = scene.coordinates[0]
    fx = (source.position[0] - origin) / h
    fy = (source.position[1] - origin) / h
    ix, iy = int(math.floor(fx)), int(math.floor(fy))
    tx, ty = fx - ix, fy - iy
    weights = np.zeros((n, n))
    for dy, wy in [(0, 1.0 - ty), (1, ty)]:
        for dx, wx in [(0, 1.0 - tx), (1, tx)]:
            if wx * wy > 0:
                weights[iy + dy, ix + dx] += wx * wy
    density = source.magnitude * weights / h**2
    return density * source.direction[0], density * source.direction[1]


def point_moment_source(
    scene: ContinuumScene, magnitude: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Force density grids (f1, f2) of a concentrated moment at the node nearest the source.

    Equal tangential forces act on every node within two grid spacings, so the ring exerts no
    net force and a net torque equal to ``magnitude``.
    """
    n = scene.nodes_per_side
    h = scene.spacing
    iy0, ix0 = scene.node_index(*scene.source.position)
    offsets = [
        (dy, dx)
        for dy in range(-_MOMENT_RING_RADIUS, _MOMENT_RING_RADIUS + 1)
        for dx in range(-_MOMENT_RING_RADIUS, _MOMENT_RING_RADIUS + 1)
        if 0 < math.hypot(dx, dy) <= _MOMENT_RING_RADIUS
    ]
    arm_sum = sum(math.hypot(dx, dy) for dy, dx in offsets) * h
    force = magnitude / arm_sum
    f1 = np.zeros((n, n))
    f2 = np.zeros((n, n))
    for dy, dx in offsets:
        radius = math.hypot(dx, dy)
        f1[iy0 + dy, ix0 + dx] += -force * dy / radius / h**2
        f2[iy0 + dy, ix0 + dx] += force * dx / radius / h**2
    return f1, f2


def source_densities(scene: ContinuumScene) -> Tuple[np.ndarray, np.ndarray]:
    if scene.source.kind == SourceKind.MOMENT:
        return point_moment_source(scene, scene.source.magnitude)
    return point_force_source(scene)


def assemble_operator(scene: ContinuumScene) -> LinearSystem:
    """
    Discretizes div(lambda (div U) I + mu (grad U + grad U^T)) + omega^2 (rho I + Sigma) U = -F.

    Both equations are multiplied by s_x s_y so the PML-stretched operator keeps its flux form;
    with alpha = 0 everywhere the matrix is complex symmetric. Nodes outside the grid are fixed
    to zero.
    """
    n = scene.nodes_per_side
    h = scene.spacing
    x = scene.coordinates
    faces = np.concatenate([[x[0] - h / 2.0], (x[:-1] + x[1:]) / 2.0, [x[-1] + h / 2.0]])
    s_nodes = pml_stretch(scene, x)
    s_faces = pml_stretch(scene, faces)
    lam, mu = scene.lambda_field, scene.mu_field
    p_modulus = lam + 2.0 * mu

    stencil = _Stencil(n)
    _add_flux_terms(stencil, 0, p_modulus, mu, (s_nodes, s_faces), (s_nodes, s_faces), h)
    _add_flux_terms(stencil, 1, mu, p_modulus, (s_nodes, s_faces), (s_nodes, s_faces), h)
    _add_mixed_terms(stencil, 0, 1, lam, mu, h)
    _add_mixed_terms(stencil, 1, 0, mu, lam, h)

    area = s_nodes[:, None] * s_nodes[None, :]
    omega_squared = scene.omega**2
    stencil.couple(0, 0, 0, 0, area * omega_squared * scene.rho_field)
    stencil.couple(1, 1, 0, 0, area * omega_squared * scene.rho_field)
    if np.any(scene.alpha_field != 0):
        stencil.couple(0, 1, 0, 0, -1j * area * omega_squared * scene.alpha_field)
        stencil.couple(1, 0, 0, 0, 1j * area * omega_squared * scene.alpha_field)

    f1, f2 = source_densities(scene)
    rhs = -np.concatenate([(area * f1).ravel(), (area * f2).ravel()])
    matrix = stencil.matrix()
    logging.info(f"Assembled {matrix.shape[0]} unknowns with {matrix.nnz} nonzeros")
    return LinearSystem(matrix=matrix, rhs=rhs, scene=scene)
