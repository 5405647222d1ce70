import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse.linalg

from .operator import LinearSystem, assemble_operator
from .scene import ContinuumScene

_DEFAULT_TOLERANCE = 1e-6
_DIRECT_LIMIT = 500


class SolverConvergenceError(Exception):
    def __init__(self, message: str, residual_history: Optional[List[float]] = None):
        super().__init__(message)
        self.residual_history = residual_history or []


@dataclass(frozen=True, eq=False)
class ComplexField:
    """
    Displacement amplitude (u1, u2) on the scene grid, indexed [iy, ix].

    Attributes:
        u1 (np.ndarray): horizontal component.
        u2 (np.ndarray): vertical component.
        coordinates (np.ndarray): node coordinates shared by both axes.
        spacing (float): grid spacing.
        half_width (float): half side of the interior square, PML excluded.
        residual (float): relative residual ||A U - b|| / ||b|| of the solve.
        method (str): "direct" or "gmres".
    """

    u1: np.ndarray = field(repr=False)
    u2: np.ndarray = field(repr=False)
    coordinates: np.ndarray = field(repr=False)
    spacing: float
    half_width: float
    residual: float = 0.0
    method: str = "direct"

    def __post_init__(self):
        if self.u1.shape != self.u2.shape:
            raise ValueError(f"Field components differ in shape: {self.u1.shape} vs {self.u2.shape}")
        if not (np.all(np.isfinite(self.u1)) and np.all(np.isfinite(self.u2))):
            raise ValueError("Field has non-finite entries")

    @property
    def origin(self) -> float:
        return float(self.coordinates[0])


def _relative_residual(system: LinearSystem, solution: np.ndarray, rhs_norm: float) -> float:
    return float(np.linalg.norm(system.matrix @ solution - system.rhs) / rhs_norm)


def _solve_direct(system: LinearSystem) -> np.ndarray:
    factor = scipy.sparse.linalg.splu(system.matrix.tocsc())
    return factor.solve(system.rhs)


def _solve_iterative(system: LinearSystem, tolerance: float, maxiter: int) -> np.ndarray:
    history: List[float] = []
    preconditioner = scipy.sparse.linalg.spilu(
        system.matrix.tocsc(), drop_tol=1e-5, fill_factor=20
    )
    operator = scipy.sparse.linalg.LinearOperator(
        system.matrix.shape, matvec=preconditioner.solve, dtype=complex
    )
    solution, info = scipy.sparse.linalg.gmres(
        system.matrix,
        system.rhs,
        rtol=tolerance / 10.0,
        restart=200,
        maxiter=maxiter,
        M=operator,
        callback=history.append,
        callback_type="pr_norm",
    )
    if info != 0:
        raise SolverConvergenceError(
            f"GMRES did not converge after {len(history)} iterations (info={info})", history
        )
    return solution


def solve_system(
    system: LinearSystem,
    tolerance: float = _DEFAULT_TOLERANCE,
    direct_limit: int = _DIRECT_LIMIT,
    maxiter: int = 50,
) -> ComplexField:
    """
    Solves an assembled system; sparse LU up to ``direct_limit`` nodes per side, preconditioned
    GMRES beyond.

    Raises:
        SolverConvergenceError: If the relative residual ends above ``tolerance``.
    """
    scene = system.scene
    n = scene.nodes_per_side
    rhs_norm = float(np.linalg.norm(system.rhs))
    if rhs_norm == 0:
        zeros = np.zeros((n, n), dtype=complex)
        return ComplexField(
            zeros, zeros.copy(), scene.coordinates, scene.spacing, scene.half_width, 0.0, "direct"
        )
    if n <= direct_limit:
        method = "direct"
        solution = _solve_direct(system)
    else:
        method = "gmres"
        solution = _solve_iterative(system, tolerance, maxiter)
    residual = _relative_residual(system, solution, rhs_norm)
    logging.info(f"Solved {system.unknowns} unknowns with {method}, relative residual {residual:.3e}")
    if not residual <= tolerance:
        raise SolverConvergenceError(
            f"Relative residual {residual:.3e} exceeds {tolerance:.1e}", [residual]
        )
    u1 = solution[: n * n].reshape(n, n)
    u2 = solution[n * n :].reshape(n, n)
    return ComplexField(
        u1, u2, scene.coordinates, scene.spacing, scene.half_width, residual, method
    )


def solve(scene: ContinuumScene, **kwargs) -> ComplexField:
    return solve_system(assemble_operator(scene), **kwargs)
