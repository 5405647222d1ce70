import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.optimize import brentq

from .lattice_geometry import (
    BlochVector,
    Flavor,
    LatticeSpec,
    bloch_phase,
    cell_basis,
)

_SQRT3 = math.sqrt(3.0)
_CRITICAL_TOLERANCE = 1e-12
_ZERO_ROOT_TOLERANCE = 1e-10
_IMAGINARY_TOLERANCE = 1e-8
_CROSS_CHECK_TOLERANCE = 1e-10

# (direction index, direction sign, neighbour junction, cell offset) per junction, read off the
# equations of motion of the two junctions of the biatomic cell.
_BIATOMIC_BONDS = [
    [
        (0, 1, 1, (0, 0)),
        (0, -1, 1, (-1, 0)),
        (1, 1, 1, (-1, 1)),
        (1, -1, 1, (0, -1)),
        (2, 1, 0, (0, -1)),
        (2, -1, 0, (0, 1)),
    ],
    [
        (0, 1, 0, (1, 0)),
        (0, -1, 0, (0, 0)),
        (1, 1, 0, (0, 1)),
        (1, -1, 0, (1, -1)),
        (2, 1, 1, (0, -1)),
        (2, -1, 1, (0, 1)),
    ],
]

# Monatomic cell translations are t1/2 and t2: l a1 = T(1, 0), l a2 = T(-1, 1), l a3 = T(0, -1).
_MONATOMIC_BONDS = [
    [
        (0, 1, 0, (1, 0)),
        (0, -1, 0, (-1, 0)),
        (1, 1, 0, (-1, 1)),
        (1, -1, 0, (1, -1)),
        (2, 1, 0, (0, -1)),
        (2, -1, 0, (0, 1)),
    ]
]


class DispersionAssemblyError(Exception):
    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class Regime(Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    INTERCRITICAL = "intercritical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class InertiaMatrix:
    """Diagonal mass matrix M and chiral matrix Sigma; the dispersion pencil uses M - Sigma."""

    M: np.ndarray
    Sigma: np.ndarray

    @property
    def pencil(self) -> np.ndarray:
        return self.M - self.Sigma


@dataclass(frozen=True)
class DispersionBranches:
    """
    Propagating frequencies at one Bloch vector.

    Attributes:
        omegas (Tuple[float, ...]): sorted radian frequencies, omega >= 0.
        regime (Regime): regime of the lattice.
        discarded (int): roots dropped as negative, infinite or surplus zero omega^2.
    """

    omegas: Tuple[float, ...]
    regime: Regime
    discarded: int = 0
    k: Optional[BlochVector] = field(default=None, compare=False)

    @property
    def count(self) -> int:
        return len(self.omegas)


def _phase_angles(k: BlochVector, spec: LatticeSpec) -> Tuple[float, float, float]:
    k1l, k2l = k.scaled(spec.l)
    phi = k1l / 2.0 + _SQRT3 * k2l / 2.0
    psi = k1l / 2.0 - _SQRT3 * k2l / 2.0
    return k1l, phi, psi


def _root_count(spec: LatticeSpec) -> int:
    return 2 if spec.flavor == Flavor.MONATOMIC else 4


def stiffness_mono(k: BlochVector, spec: LatticeSpec) -> np.ndarray:
    """Closed-form 2x2 stiffness matrix of the monatomic lattice."""
    if spec.flavor != Flavor.MONATOMIC:
        raise ValueError("stiffness_mono requires a monatomic lattice spec")
    k1l, phi, psi = _phase_angles(k, spec)
    cos_sum = math.cos(phi) + math.cos(psi)
    c11 = 3.0 - 2.0 * math.cos(k1l) - cos_sum / 2.0
    c12 = _SQRT3 * (math.cos(psi) - math.cos(phi)) / 2.0
    c22 = 3.0 - 3.0 * cos_sum / 2.0
    return spec.c * np.array([[c11, c12], [c12, c22]])


def stiffness_bi(k: BlochVector, spec: LatticeSpec) -> np.ndarray:
    """
    4x4 Hermitian stiffness matrix of the biatomic lattice built from its printed 2x2 blocks.

    The off-diagonal blocks carry the phase exp[i(Phi + Psi)] of the cell-origin gauge.
    """
    if spec.flavor != Flavor.BIATOMIC:
        raise ValueError("stiffness_bi requires a biatomic lattice spec")
    _, phi, psi = _phase_angles(k, spec)
    cos_phi = math.cos(phi)
    cos_psi = math.cos(psi)
    diagonal = np.array(
        [
            [3.0 - cos_phi / 2.0, -_SQRT3 * cos_phi / 2.0],
            [-_SQRT3 * cos_phi / 2.0, 3.0 - 3.0 * cos_phi / 2.0],
        ]
    )
    coupling = np.array(
        [
            [-2.0 * math.cos(phi + psi) - cos_psi / 2.0, _SQRT3 * cos_psi / 2.0],
            [_SQRT3 * cos_psi / 2.0, -3.0 * cos_psi / 2.0],
        ]
    )
    c21 = np.exp(1j * (phi + psi)) * coupling
    c12 = np.conj(c21)
    return spec.c * np.block([[diagonal, c12], [c21, diagonal]])


def stiffness_bond_sum(k: BlochVector, spec: LatticeSpec) -> np.ndarray:
    """
    Stiffness matrix assembled bond by bond from the equations of motion.

    Every bond from junction kappa along direction a to junction kappa' in cell n adds
    c a(x)a to the (kappa, kappa) block and -c a(x)a exp(i k . T n) to the (kappa, kappa') block.
    """
    basis = cell_basis(spec)
    bonds = _MONATOMIC_BONDS if spec.flavor == Flavor.MONATOMIC else _BIATOMIC_BONDS
    size = 2 * len(bonds)
    result = np.zeros((size, size), dtype=complex)
    directions = basis.bond_directions
    for junction, junction_bonds in enumerate(bonds):
        row = slice(2 * junction, 2 * junction + 2)
        for direction_index, sign, neighbour, offset in junction_bonds:
            a = sign * directions[direction_index]
            projector = spec.c * np.outer(a, a)
            column = slice(2 * neighbour, 2 * neighbour + 2)
            result[row, row] += projector
            result[row, column] -= projector * bloch_phase(k, offset, basis, spec.flavor)
    return result


def stiffness(k: BlochVector, spec: LatticeSpec) -> np.ndarray:
    """
    Stiffness matrix for either flavor.

    The biatomic printed blocks are cross-checked against the bond-sum assembly; on a mismatch
    the bond sum is used and the discrepancy is logged.
    """
    if spec.flavor == Flavor.MONATOMIC:
        return stiffness_mono(k, spec).astype(complex)
    printed = stiffness_bi(k, spec)
    assembled = stiffness_bond_sum(k, spec)
    deviation = float(np.max(np.abs(printed - assembled)))
    if deviation > _CROSS_CHECK_TOLERANCE * spec.c:
        logging.warning(
            f"Printed biatomic stiffness deviates from bond-sum assembly by {deviation:.3e} "
            f"at k=({k.k1}, {k.k2}); using the bond-sum matrix"
        )
        return assembled
    return printed


def inertia(spec: LatticeSpec) -> InertiaMatrix:
    def _block(alpha: float) -> np.ndarray:
        return np.array([[0.0, -1j * alpha], [1j * alpha, 0.0]])

    if spec.flavor == Flavor.MONATOMIC:
        return InertiaMatrix(
            M=np.diag([spec.m, spec.m]).astype(complex), Sigma=_block(spec.alpha)
        )
    sigma = np.zeros((4, 4), dtype=complex)
    sigma[:2, :2] = _block(spec.alpha1)
    sigma[2:, 2:] = _block(spec.alpha2)
    return InertiaMatrix(
        M=np.diag([spec.m1, spec.m1, spec.m2, spec.m2]).astype(complex), Sigma=sigma
    )


def classify_regime(spec: LatticeSpec) -> Regime:
    """
    Regime of the lattice.

    Monatomic: compares m^2 with alpha^2 (critical within a relative tolerance of 1e-12).
    Biatomic: counts junctions whose |alpha_j| exceeds m_j; none is subcritical, one is
    intercritical and both is supercritical.
    """
    if spec.flavor == Flavor.MONATOMIC:
        gap = spec.m**2 - spec.alpha**2
        if abs(gap) <= _CRITICAL_TOLERANCE * spec.m**2:
            return Regime.CRITICAL
        return Regime.SUBCRITICAL if gap > 0 else Regime.SUPERCRITICAL
    exceeded = sum(
        1
        for m, alpha in [(spec.m1, spec.alpha1), (spec.m2, spec.alpha2)]
        if abs(alpha) > m * (1.0 + _CRITICAL_TOLERANCE)
    )
    return [Regime.SUBCRITICAL, Regime.INTERCRITICAL, Regime.SUPERCRITICAL][exceeded]


def expected_branch_count(spec: LatticeSpec) -> int:
    """Number of positive eigenvalues m_j +- alpha_j of M - Sigma, i.e. branches at k != 0."""
    junctions = [(spec.m1, spec.alpha1)]
    if spec.flavor == Flavor.BIATOMIC:
        junctions.append((spec.m2, spec.alpha2))
    count = 0
    for m, alpha in junctions:
        for eigenvalue in (m + abs(alpha), m - abs(alpha)):
            if eigenvalue > _CRITICAL_TOLERANCE * m:
                count += 1
    return count


def _frequency_scale(spec: LatticeSpec) -> float:
    return spec.c / min(spec.m1, spec.m2)


def _branches_from_squares(
    squares: List[float], spec: LatticeSpec, regime: Regime, k: BlochVector
) -> DispersionBranches:
    """Turns omega^2 roots into sorted frequencies; surplus zero roots count as discarded."""
    zero_tolerance = _ZERO_ROOT_TOLERANCE * _frequency_scale(spec)
    positive = sorted(math.sqrt(s) for s in squares if s > zero_tolerance)
    zeros = sum(1 for s in squares if abs(s) <= zero_tolerance)
    zeros = max(0, min(zeros, expected_branch_count(spec) - len(positive)))
    omegas = tuple([0.0] * zeros + positive)
    return DispersionBranches(
        omegas=omegas,
        regime=regime,
        discarded=_root_count(spec) - len(omegas),
        k=k,
    )


def dispersion_mono(k: BlochVector, spec: LatticeSpec) -> DispersionBranches:
    """
    Solves omega^4 (m^2 - alpha^2) - omega^2 m tr C + det C = 0 for the monatomic lattice.

    In the critical band the degenerate linear equation gives omega^2 = det C / (m tr C).
    """
    if spec.flavor != Flavor.MONATOMIC:
        raise ValueError("dispersion_mono requires a monatomic lattice spec")
    regime = classify_regime(spec)
    c_matrix = stiffness_mono(k, spec)
    trace = float(np.trace(c_matrix))
    determinant = float(c_matrix[0, 0] * c_matrix[1, 1] - c_matrix[0, 1] * c_matrix[1, 0])
    m = spec.m
    leading = m**2 - spec.alpha**2
    if trace <= 1e-14 * spec.c:
        squares = [0.0] if regime == Regime.CRITICAL else [0.0, 0.0]
        return _branches_from_squares(squares, spec, regime, k)
    # q = (m tr C + sqrt(disc)) / 2 gives the roots q / leading and det C / q without cancellation
    discriminant = max((m * trace) ** 2 - 4.0 * leading * determinant, 0.0)
    q = (m * trace + math.sqrt(discriminant)) / 2.0
    squares = [determinant / q]
    if regime != Regime.CRITICAL:
        squares.append(q / leading)
    return _branches_from_squares(squares, spec, regime, k)


def _check_hermitian(matrix: np.ndarray, name: str, k: BlochVector, scale: float):
    residual = float(np.max(np.abs(matrix - matrix.conj().T)))
    if residual > 1e-10 * scale:
        raise DispersionAssemblyError(
            f"{name} matrix is not Hermitian (residual {residual:.3e})",
            {"k": (k.k1, k.k2), "residual": residual, "matrix": matrix.tolist()},
        )


def _generalized_squares(
    c_matrix: np.ndarray, pencil: np.ndarray, k: BlochVector, scale: float
) -> List[float]:
    """
    Real eigenvalues omega^2 of C x = omega^2 (M - Sigma) x.

    Uses a Cholesky-based Hermitian solve when M - Sigma or C is definite and falls back to
    the QZ algorithm otherwise; infinite eigenvalues are left out.
    """
    pencil_eigenvalues = np.linalg.eigvalsh(pencil)
    if np.min(pencil_eigenvalues) > _CRITICAL_TOLERANCE * np.max(np.abs(pencil_eigenvalues)):
        return list(scipy.linalg.eigh(c_matrix, pencil, eigvals_only=True))
    stiffness_min = float(np.min(np.linalg.eigvalsh(c_matrix)))
    if stiffness_min > 1e-10 * scale:
        inverse = scipy.linalg.eigh(pencil, c_matrix, eigvals_only=True)
        largest = float(np.max(np.abs(inverse)))
        return [1.0 / mu for mu in inverse if abs(mu) > _CRITICAL_TOLERANCE * largest]
    eigenvalues = scipy.linalg.eigvals(c_matrix, pencil)
    finite = eigenvalues[np.isfinite(eigenvalues)]
    imaginary = float(np.max(np.abs(finite.imag))) if len(finite) else 0.0
    if imaginary > _IMAGINARY_TOLERANCE * scale:
        raise DispersionAssemblyError(
            f"Complex omega^2 found (imaginary part {imaginary:.3e})",
            {
                "k": (k.k1, k.k2),
                "eigenvalues": [complex(e) for e in finite],
                "imaginary": imaginary,
                "scale": scale,
            },
        )
    return [float(e.real) for e in finite]


def dispersion_bi(k: BlochVector, spec: LatticeSpec) -> DispersionBranches:
    """
    Solves det[C(k) - omega^2 (M - Sigma)] = 0 for the biatomic lattice as a generalized
    Hermitian eigenproblem.

    Raises:
        DispersionAssemblyError: If an assembled matrix is not Hermitian or a root is complex.
    """
    if spec.flavor != Flavor.BIATOMIC:
        raise ValueError("dispersion_bi requires a biatomic lattice spec")
    scale = _frequency_scale(spec)
    c_matrix = stiffness(k, spec)
    pencil = inertia(spec).pencil
    _check_hermitian(c_matrix, "Stiffness", k, spec.c)
    _check_hermitian(pencil, "Inertia", k, max(spec.m1, spec.m2))
    squares = _generalized_squares(c_matrix, pencil, k, scale)
    return _branches_from_squares(squares, spec, classify_regime(spec), k)


def bloch_dispersion(k: BlochVector, spec: LatticeSpec) -> DispersionBranches:
    if spec.flavor == Flavor.MONATOMIC:
        return dispersion_mono(k, spec)
    return dispersion_bi(k, spec)


def dispersion_determinant(
    k: BlochVector, spec: LatticeSpec, omegas: np.ndarray
) -> np.ndarray:
    """det[C(k) - omega^2 (M - Sigma)] evaluated for an array of omegas (real for Hermitian C)."""
    c_matrix = stiffness(k, spec)
    pencil = inertia(spec).pencil
    squares = np.asarray(omegas, dtype=float) ** 2
    stack = c_matrix[None, :, :] - squares[:, None, None] * pencil[None, :, :]
    return np.linalg.det(stack).real


def dispersion_det_scan(
    k: BlochVector, spec: LatticeSpec, omega_max: float, n_steps: int = 4000
) -> List[float]:
    """
    Brute-force roots of the dispersion determinant below omega_max.

    Scans omega on a uniform grid, brackets sign changes and refines them with Brent's method.
    A vanishing determinant at omega = 0 is reported as the single root 0.

    Raises:
        ValueError: If omega_max <= 0 or n_steps < 100.
    """
    if not omega_max > 0:
        raise ValueError(f"omega_max must be positive. Received: {omega_max}")
    if n_steps < 100:
        raise ValueError(f"n_steps must be at least 100. Received: {n_steps}")
    grid = np.linspace(0.0, omega_max, int(n_steps) + 1)
    values = dispersion_determinant(k, spec, grid)
    # det C at omega = 0 is measured against the stiffness scale alone; it grows like |k|^4
    origin_scale = (6.0 * spec.c) ** _root_count(spec)

    def _determinant(omega: float) -> float:
        return float(dispersion_determinant(k, spec, np.array([omega]))[0])

    roots = []
    origin_root = abs(values[0]) <= 1e-12 * origin_scale
    if origin_root:
        roots.append(0.0)
    for index in range(1, len(grid)):
        left, right = values[index - 1], values[index]
        if right == 0.0:
            roots.append(float(grid[index]))
        elif left != 0.0 and left * right < 0:
            roots.append(
                float(brentq(_determinant, grid[index - 1], grid[index], xtol=1e-14))
            )
    if not origin_root:
        expected = expected_branch_count(spec)
        if len(roots) != expected:
            logging.warning(
                f"Determinant scan found {len(roots)} roots below omega_max={omega_max} "
                f"at k=({k.k1}, {k.k2}); the regime predicts {expected}"
            )
    return roots


def compare_with_scan(
    k: BlochVector, spec: LatticeSpec, omega_max: float, n_steps: int = 4000
) -> dict:
    """
    Compares the eigen solver with the determinant scan at one Bloch vector.

    Returns:
        dict: A dictionary containing:
            - "solver" (List[float]): distinct solver roots below omega_max.
            - "scan" (List[float]): determinant-scan roots.
            - "max_deviation" (float): largest root mismatch (inf when counts differ).
            - "counts_agree" (bool): whether both methods found the same number of roots.
    """
    solver = sorted(set(w for w in bloch_dispersion(k, spec).omegas if w < omega_max))
    scan = dispersion_det_scan(k, spec, omega_max, n_steps)
    counts_agree = len(solver) == len(scan)
    if counts_agree and solver:
        deviation = float(np.max(np.abs(np.array(solver) - np.array(scan))))
    else:
        deviation = 0.0 if counts_agree else math.inf
    return {
        "solver": solver,
        "scan": scan,
        "max_deviation": deviation,
        "counts_agree": counts_agree,
    }


def lowfreq_mono(k: BlochVector, spec: LatticeSpec) -> Tuple[float, Optional[float]]:
    """
    Long-wave asymptotics (omega_1, omega_2) of the monatomic branches.

    (2m - s) / (m^2 - alpha^2) with s = sqrt(m^2 + 3 alpha^2) equals 3 / (2m + s), which stays
    finite through alpha = m and reproduces the critical coefficient 9c / (32m) there.
    omega_2 exists only for |alpha| < m.
    """
    if spec.flavor != Flavor.MONATOMIC:
        raise ValueError("lowfreq_mono requires a monatomic lattice spec")
    k1l, k2l = k.scaled(spec.l)
    radius_squared = k1l**2 + k2l**2
    m, alpha = spec.m, spec.alpha
    root = math.sqrt(m**2 + 3.0 * alpha**2)
    omega_1 = math.sqrt(3.0 * spec.c / 8.0 * 3.0 / (2.0 * m + root) * radius_squared)
    if classify_regime(spec) != Regime.SUBCRITICAL:
        return omega_1, None
    omega_2 = math.sqrt(
        3.0 * spec.c / 8.0 * (2.0 * m + root) / (m**2 - alpha**2) * radius_squared
    )
    return omega_1, omega_2


def scalar_lattice_dispersion(
    k: BlochVector, c_s: float, m_s: float, l: float = 1.0
) -> float:
    """Dispersion of the harmonic scalar (out-of-plane) triangular lattice."""
    if c_s <= 0 or m_s <= 0:
        raise ValueError(f"c_s and m_s must be positive. Received: {c_s}, {m_s}")
    k1l, k2l = k.scaled(l)
    half = math.cos(k1l / 2.0)
    value = 8.0 - 4.0 * half**2 - 4.0 * half * math.cos(_SQRT3 * k2l / 2.0)
    return math.sqrt(c_s / m_s * max(value, 0.0))


def equivalent_scalar_ratio(m: float, alpha: float, c: float = 1.0) -> float:
    """
    Ratio c_s / m_s of the scalar lattice whose waves match the vector shear branch at low frequency.

    (c / 4m)(sqrt(1 + 3a^2) - 2) / (a^2 - 1) with a = alpha / m is evaluated as
    (c / 4m) 3 / (sqrt(1 + 3a^2) + 2), which equals 3c / (16m) at |alpha| = m.
    """
    if m <= 0 or c <= 0:
        raise ValueError(f"m and c must be positive. Received: m={m}, c={c}")
    ratio = alpha / m
    return c / (4.0 * m) * 3.0 / (math.sqrt(1.0 + 3.0 * ratio**2) + 2.0)


def describe(spec: LatticeSpec) -> dict:
    return {
        "flavor": spec.flavor.value,
        "regime": classify_regime(spec).value,
        "expected_branches": expected_branch_count(spec),
        "root_count": _root_count(spec),
    }
