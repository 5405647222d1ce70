import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from skimage import measure

from .bloch_dispersion import bloch_dispersion, classify_regime
from .lattice_geometry import (
    BlochVector,
    LatticeSpec,
    reciprocal_basis,
    reciprocal_cell_samples,
    window_samples,
)
from .sweep_utils import parallel_map

_MIN_SURFACE_RESOLUTION = 16
_MIN_GAP_RESOLUTION = 64
_DEFAULT_GAP_THRESHOLD = 1e-3
_MAX_SWEEP_KL_SPAN = 2.0 * math.pi


@dataclass(frozen=True)
class BandSurfaces:
    """
    Dispersion branches sampled over the reciprocal cell or a rectangular (k1 l, k2 l) window.

    Attributes:
        spec (LatticeSpec): lattice the surfaces belong to.
        k_grid (List[BlochVector]): sampled Bloch vectors, second coordinate running fastest.
        branches (List[Tuple[float, ...]]): sorted frequencies per sampled k.
        resolution (int): samples per side.
        window (Optional[Tuple[Tuple[float, float], Tuple[float, float]]]): (k1 l, k2 l) ranges of a
            window grid, None for the full reciprocal cell.
    """

    spec: LatticeSpec
    k_grid: List[BlochVector]
    branches: List[Tuple[float, ...]]
    resolution: int
    window: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None

    @property
    def max_branches(self) -> int:
        return max((len(b) for b in self.branches), default=0)

    def branch_grid(self, j: int) -> np.ndarray:
        """Branch j as a resolution x resolution array, NaN where the branch does not exist."""
        values = np.full(len(self.branches), np.nan)
        for index, omegas in enumerate(self.branches):
            if j < len(omegas):
                values[index] = omegas[j]
        return values.reshape(self.resolution, self.resolution)

    def grid_to_k(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Maps fractional grid indices to (k1, k2) points."""
        if self.window is None:
            b1, b2 = reciprocal_basis(self.spec)
            s1 = (rows - self.resolution // 2) / self.resolution
            s2 = (cols - self.resolution // 2) / self.resolution
            return np.outer(s1, b1) + np.outer(s2, b2)
        (k1_low, k1_high), (k2_low, k2_high) = self.window
        step = self.resolution - 1
        k1l = k1_low + rows * (k1_high - k1_low) / step
        k2l = k2_low + cols * (k2_high - k2_low) / step
        return np.column_stack([k1l, k2l]) / self.spec.l


@dataclass(frozen=True)
class BandGap:
    omega_low: float
    omega_high: float

    def __post_init__(self):
        if not self.omega_high > self.omega_low:
            raise ValueError(
                f"Band gap needs omega_high > omega_low. Received: ({self.omega_low}, {self.omega_high})"
            )

    @property
    def width(self) -> float:
        return self.omega_high - self.omega_low

    def contains(self, omega: float) -> bool:
        return self.omega_low < omega < self.omega_high


def compute_surfaces(
    spec: LatticeSpec,
    resolution: int,
    window: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None,
    threads: Optional[int] = None,
) -> BandSurfaces:
    """
    Samples all dispersion branches on a resolution x resolution grid of Bloch vectors.

    Args:
        spec (LatticeSpec): lattice to analyse.
        resolution (int): samples per side, at least 16.
        window: optional (k1 l, k2 l) ranges; the reciprocal cell is used when omitted.
        threads (Optional[int]): worker count, see ``sweep_utils.thread_count``.

    Returns:
        BandSurfaces: branches per sampled k, in grid order regardless of the worker count.
    """
    if int(resolution) != resolution or resolution < _MIN_SURFACE_RESOLUTION:
        raise ValueError(
            f"Surface resolution must be an integer >= {_MIN_SURFACE_RESOLUTION}. Received: {resolution}"
        )
    resolution = int(resolution)
    if window is None:
        k_grid = reciprocal_cell_samples(spec, resolution)
    else:
        k_grid = window_samples(spec, window[0], window[1], resolution)
    logging.info(
        f"Computing {len(k_grid)} Bloch points for a {spec.flavor.value} lattice "
        f"in the {classify_regime(spec).value} regime"
    )
    branches = parallel_map(lambda k: bloch_dispersion(k, spec).omegas, k_grid, threads)
    return BandSurfaces(
        spec=spec,
        k_grid=k_grid,
        branches=branches,
        resolution=resolution,
        window=None if window is None else (tuple(window[0]), tuple(window[1])),
    )


def branch_ranges(s: BandSurfaces) -> List[Tuple[float, float]]:
    """(min, max) of every sorted branch over the sampled grid."""
    ranges = []
    for j in range(s.max_branches):
        values = [omegas[j] for omegas in s.branches if j < len(omegas)]
        ranges.append((min(values), max(values)))
    return ranges


def _gaps_from_ranges(
    ranges: Sequence[Tuple[float, float]], omega_max: float, threshold: float
) -> List[BandGap]:
    gaps = []
    covered = 0.0
    for low, high in sorted(ranges):
        if low >= omega_max:
            break
        if low - covered >= threshold:
            gaps.append(BandGap(covered, low))
        covered = max(covered, high)
    return gaps


def band_gaps(
    s: BandSurfaces,
    omega_max: float,
    threshold: float = _DEFAULT_GAP_THRESHOLD,
    probe_points: int = 0,
    seed: int = 0,
) -> List[BandGap]:
    """
    Total band gaps below omega_max.

    A gap is a maximal interval between the union of branch ranges that is bounded above by a
    branch starting below omega_max; the empty region above the highest branch is not a gap.
    Gaps narrower than ``threshold`` are dropped as grid noise.

    Args:
        s (BandSurfaces): sampled surfaces, resolution 64 or finer for reliable gap edges.
        omega_max (float): upper frequency limit.
        threshold (float): minimum gap width.
        probe_points (int): random extra Bloch vectors used to shrink the gaps, 0 disables.
        seed (int): seed of the random probe.
    """
    if not omega_max > 0:
        raise ValueError(f"omega_max must be positive. Received: {omega_max}")
    if s.resolution < _MIN_GAP_RESOLUTION:
        logging.warning(
            f"Band gaps detected on resolution {s.resolution}, below the accuracy floor "
            f"of {_MIN_GAP_RESOLUTION}"
        )
    gaps = _gaps_from_ranges(branch_ranges(s), omega_max, threshold)
    if probe_points > 0:
        gaps = probe_gaps(s.spec, gaps, probe_points, seed, threshold=threshold)
    logging.info(f"Found {len(gaps)} band gaps below omega={omega_max}")
    return gaps


def probe_gaps(
    spec: LatticeSpec,
    gaps: List[BandGap],
    n_probe: int,
    seed: int = 0,
    threshold: float = _DEFAULT_GAP_THRESHOLD,
    threads: Optional[int] = None,
) -> List[BandGap]:
    """
    Shrinks gaps so that none contains a branch value found at n_probe random Bloch vectors.

    A probe value inside a gap extends the band of its branch: the gap's lower edge when the
    branch mostly lies below the gap, its upper edge otherwise.
    """
    if not gaps or n_probe <= 0:
        return list(gaps)
    rng = np.random.default_rng(seed)
    b1, b2 = reciprocal_basis(spec)
    fractions = rng.uniform(-0.5, 0.5, size=(int(n_probe), 2))
    probes = [BlochVector(*(s1 * b1 + s2 * b2)) for s1, s2 in fractions]
    samples = parallel_map(lambda k: bloch_dispersion(k, spec).omegas, probes, threads)
    width = max((len(omegas) for omegas in samples), default=0)
    per_branch = [
        np.array([omegas[j] for omegas in samples if j < len(omegas)]) for j in range(width)
    ]
    result = []
    for gap in gaps:
        low, high = gap.omega_low, gap.omega_high
        for values in per_branch:
            inside = values[(values > low) & (values < high)]
            if inside.size == 0:
                continue
            if np.median(values) <= low:
                low = max(low, float(inside.max()))
            else:
                high = min(high, float(inside.min()))
        if high - low >= threshold:
            result.append(BandGap(low, high))
        else:
            logging.info(f"Gap ({gap.omega_low}, {gap.omega_high}) closed by random probing")
    return result


@dataclass(frozen=True)
class AlphaSweep:
    """
    Branches over an (alpha, k l) grid along the reciprocal-space line k1 = k2.

    ``branches[a][q]`` holds the sorted frequencies at ``alphas[a]`` and ``kls[q]``.
    """

    alphas: np.ndarray
    kls: np.ndarray
    branches: List[List[Tuple[float, ...]]]

    @property
    def max_branches(self) -> int:
        return max((len(b) for row in self.branches for b in row), default=0)

    def sheet(self, j: int) -> np.ma.MaskedArray:
        values = np.full((len(self.alphas), len(self.kls)), np.nan)
        for a, row in enumerate(self.branches):
            for q, omegas in enumerate(row):
                if j < len(omegas):
                    values[a, q] = omegas[j]
        return np.ma.masked_invalid(values)

    def branch_counts(self, kl_index: int) -> List[int]:
        return [len(row[kl_index]) for row in self.branches]


def alpha_sweep_diagonal(
    spec: LatticeSpec,
    alphas: Sequence[float],
    kls: Sequence[float],
    threads: Optional[int] = None,
) -> AlphaSweep:
    """
    Computes omega(alpha, k) along k1 = k2 with the same spinner constant at every junction.

    Raises:
        ValueError: If the k l values span more than 2 pi.
    """
    kls = np.asarray(kls, dtype=float)
    alphas = np.asarray(alphas, dtype=float)
    if kls.size == 0 or alphas.size == 0:
        raise ValueError("alpha and k ranges must not be empty")
    if kls.max() - kls.min() > _MAX_SWEEP_KL_SPAN:
        raise ValueError(
            f"k l values may span at most {_MAX_SWEEP_KL_SPAN:.6g}. "
            f"Received: [{kls.min()}, {kls.max()}]"
        )
    jobs = [(alpha, kl) for alpha in alphas for kl in kls]

    def _solve(job):
        alpha, kl = job
        return bloch_dispersion(
            BlochVector.from_scaled(kl, kl, spec.l), spec.with_alpha(float(alpha))
        ).omegas

    flat = parallel_map(_solve, jobs, threads)
    rows = [flat[a * len(kls) : (a + 1) * len(kls)] for a in range(len(alphas))]
    return AlphaSweep(alphas=alphas, kls=kls, branches=rows)


def slowness_contours(
    s: BandSurfaces, omega_levels: Sequence[float]
) -> Dict[int, Dict[float, List[np.ndarray]]]:
    """
    Isofrequency polylines of every branch.

    Returns:
        Dict[int, Dict[float, List[np.ndarray]]]: per branch and level, a list of (n, 2) arrays of
            (k1, k2) points; levels outside a branch's range map to an empty list.
    """
    contours = {}
    for j in range(s.max_branches):
        grid = s.branch_grid(j)
        valid = ~np.isnan(grid)
        low, high = float(np.nanmin(grid)), float(np.nanmax(grid))
        filled = np.where(valid, grid, low)
        contours[j] = {}
        for level in omega_levels:
            if not low < level < high:
                contours[j][level] = []
                continue
            polylines = measure.find_contours(filled, level, mask=valid)
            contours[j][level] = [
                s.grid_to_k(line[:, 0], line[:, 1]) for line in polylines if len(line) > 1
            ]
    return contours
