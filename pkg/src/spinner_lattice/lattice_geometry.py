import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

_SQRT3 = math.sqrt(3.0)


class Flavor(Enum):
    MONATOMIC = "monatomic"
    BIATOMIC = "biatomic"


@dataclass(frozen=True)
class LatticeSpec:
    """
    Geometry and physics of the triangular lattice with spinners.

    Attributes:
        l (float): bond length.
        c (float): link stiffness.
        m1 (float): mass of the first junction of the cell.
        m2 (float): mass of the second junction of the cell.
        alpha1 (float): spinner constant at the first junction (sign = handedness).
        alpha2 (float): spinner constant at the second junction.
        flavor (Flavor): monatomic (one junction per cell) or biatomic.
    """

    l: float = 1.0
    c: float = 1.0
    m1: float = 1.0
    m2: float = 1.0
    alpha1: float = 0.0
    alpha2: float = 0.0
    flavor: Flavor = Flavor.MONATOMIC

    def __post_init__(self):
        validate_lattice_spec(self)

    @classmethod
    def monatomic(
        cls, m: float = 1.0, alpha: float = 0.0, c: float = 1.0, l: float = 1.0
    ) -> "LatticeSpec":
        return cls(l=l, c=c, m1=m, m2=m, alpha1=alpha, alpha2=alpha)

    @classmethod
    def biatomic(
        cls,
        m1: float,
        m2: float,
        alpha1: float = 0.0,
        alpha2: Optional[float] = None,
        c: float = 1.0,
        l: float = 1.0,
    ) -> "LatticeSpec":
        return cls(
            l=l,
            c=c,
            m1=m1,
            m2=m2,
            alpha1=alpha1,
            alpha2=alpha1 if alpha2 is None else alpha2,
            flavor=Flavor.BIATOMIC,
        )

    @classmethod
    def from_config(cls, config: dict) -> "LatticeSpec":
        """
        Builds a spec from a ``[lattice]`` config section.

        ``m`` and ``alpha`` set both junctions at once; the per-junction keys win when given.
        """
        flavor = Flavor(str(config.get("flavor", "monatomic")).lower())
        m = config.get("m")
        alpha = config.get("alpha")
        m1 = config.get("m1") if config.get("m1") is not None else m
        m2 = config.get("m2") if config.get("m2") is not None else m
        alpha1 = config.get("alpha1") if config.get("alpha1") is not None else alpha
        alpha2 = config.get("alpha2") if config.get("alpha2") is not None else alpha
        if flavor == Flavor.MONATOMIC:
            m2 = m1 if m2 is None else m2
            alpha2 = alpha1 if alpha2 is None else alpha2
        return cls(
            l=float(config.get("l", 1.0)),
            c=float(config.get("c", 1.0)),
            m1=float(1.0 if m1 is None else m1),
            m2=float(1.0 if m2 is None else m2),
            alpha1=float(0.0 if alpha1 is None else alpha1),
            alpha2=float(0.0 if alpha2 is None else alpha2),
            flavor=flavor,
        )

    def with_alpha(self, alpha: float) -> "LatticeSpec":
        return LatticeSpec(
            l=self.l,
            c=self.c,
            m1=self.m1,
            m2=self.m2,
            alpha1=alpha,
            alpha2=alpha,
            flavor=self.flavor,
        )

    @property
    def m(self) -> float:
        return self.m1

    @property
    def alpha(self) -> float:
        return self.alpha1


def validate_lattice_spec(spec: LatticeSpec):
    """
    Validates the physical parameters of a lattice spec.

    Raises:
        ValueError: If a length, stiffness or mass is not positive, a value is not finite,
            or a monatomic spec carries two different junctions.
    """
    for name in ["l", "c", "m1", "m2", "alpha1", "alpha2"]:
        value = getattr(spec, name)
        if not math.isfinite(value):
            raise ValueError(f"Lattice parameter '{name}' must be finite. Received: {value}")
    for name in ["l", "c", "m1", "m2"]:
        if getattr(spec, name) <= 0:
            raise ValueError(
                f"Lattice parameter '{name}' must be positive. Received: {getattr(spec, name)}"
            )
    if not isinstance(spec.flavor, Flavor):
        raise ValueError(f"Unknown lattice flavor: {spec.flavor}")
    if spec.flavor == Flavor.MONATOMIC and (
        spec.m1 != spec.m2 or spec.alpha1 != spec.alpha2
    ):
        raise ValueError(
            "Monatomic lattice requires m1 = m2 and alpha1 = alpha2. "
            f"Received: m=({spec.m1}, {spec.m2}), alpha=({spec.alpha1}, {spec.alpha2})"
        )


@dataclass(frozen=True)
class BlochVector:
    k1: float
    k2: float

    def __post_init__(self):
        if not (math.isfinite(self.k1) and math.isfinite(self.k2)):
            raise ValueError(f"Bloch vector must be finite. Received: ({self.k1}, {self.k2})")

    @classmethod
    def from_scaled(cls, k1l: float, k2l: float, l: float = 1.0) -> "BlochVector":
        """Builds a Bloch vector from dimensionless (k1 l, k2 l) values."""
        return cls(k1l / l, k2l / l)

    def scaled(self, l: float) -> Tuple[float, float]:
        return self.k1 * l, self.k2 * l

    def as_array(self) -> np.ndarray:
        return np.array([self.k1, self.k2])

    def __add__(self, other: "BlochVector") -> "BlochVector":
        return BlochVector(self.k1 + other.k1, self.k2 + other.k2)

    def __neg__(self) -> "BlochVector":
        return BlochVector(-self.k1, -self.k2)


@dataclass(frozen=True)
class CellBasis:
    """
    Translation vectors and bond directions of the triangular lattice.

    ``T`` holds the columns used by the monatomic Bloch condition (t1/2 and t2);
    ``cell_matrix(flavor)`` returns the translations of the actual periodic cell.
    """

    t1: np.ndarray
    t2: np.ndarray
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    T: np.ndarray

    @property
    def bond_directions(self) -> List[np.ndarray]:
        return [self.a1, self.a2, self.a3]

    def cell_matrix(self, flavor: Flavor) -> np.ndarray:
        if flavor == Flavor.MONATOMIC:
            return self.T
        return np.column_stack([self.t1, self.t2])


def cell_basis(spec: LatticeSpec) -> CellBasis:
    l = spec.l
    t1 = np.array([2.0 * l, 0.0])
    t2 = np.array([l / 2.0, l * _SQRT3 / 2.0])
    return CellBasis(
        t1=t1,
        t2=t2,
        a1=np.array([1.0, 0.0]),
        a2=np.array([-0.5, _SQRT3 / 2.0]),
        a3=np.array([-0.5, -_SQRT3 / 2.0]),
        T=np.array([[l, l / 2.0], [0.0, l * _SQRT3 / 2.0]]),
    )


def bloch_phase(
    k: BlochVector,
    n: Tuple[int, int],
    basis: CellBasis,
    flavor: Flavor = Flavor.MONATOMIC,
) -> complex:
    """
    Phase factor exp(i k . T n) picked up across ``n`` cell translations.

    Args:
        k (BlochVector): Bloch vector.
        n (Tuple[int, int]): multi-index of the cell.
        basis (CellBasis): lattice basis.
        flavor (Flavor): selects the cell translations; the monatomic cell uses t1/2 and t2.

    Returns:
        complex: unit-modulus phase factor.
    """
    shift = basis.cell_matrix(flavor) @ np.asarray(n, dtype=float)
    return complex(np.exp(1j * float(k.as_array() @ shift)))


def reciprocal_basis(spec: LatticeSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Reciprocal vectors b1, b2 with b_i . t_j = 2 pi delta_ij for the spec's periodic cell."""
    cell = cell_basis(spec).cell_matrix(spec.flavor)
    reciprocal = 2.0 * math.pi * np.linalg.inv(cell).T
    return reciprocal[:, 0], reciprocal[:, 1]


def fractional_coordinates(spec: LatticeSpec, k: BlochVector) -> np.ndarray:
    """Coordinates (s1, s2) of k in the reciprocal basis, k = s1 b1 + s2 b2."""
    b1, b2 = reciprocal_basis(spec)
    return np.linalg.solve(np.column_stack([b1, b2]), k.as_array())


def reciprocal_cell_samples(spec: LatticeSpec, resolution: int) -> List[BlochVector]:
    """
    Samples one reciprocal cell on a resolution x resolution grid.

    The grid uses fractional coordinates s = (j - resolution // 2) / resolution, so k = 0 is
    always sampled and no periodic image appears twice. Points are ordered with the b2
    coordinate running fastest.

    Raises:
        ValueError: If resolution < 2.
    """
    if int(resolution) != resolution or resolution < 2:
        raise ValueError(f"Resolution must be an integer >= 2. Received: {resolution}")
    resolution = int(resolution)
    b1, b2 = reciprocal_basis(spec)
    fractions = (np.arange(resolution) - resolution // 2) / resolution
    return [
        BlochVector(*(s1 * b1 + s2 * b2))
        for s1 in fractions
        for s2 in fractions
    ]


def window_samples(
    spec: LatticeSpec,
    k1l_range: Tuple[float, float],
    k2l_range: Tuple[float, float],
    resolution: int,
) -> List[BlochVector]:
    """Samples a rectangular (k1 l, k2 l) window, endpoints included, k2 running fastest."""
    if int(resolution) != resolution or resolution < 2:
        raise ValueError(f"Resolution must be an integer >= 2. Received: {resolution}")
    k1ls = np.linspace(k1l_range[0], k1l_range[1], int(resolution))
    k2ls = np.linspace(k2l_range[0], k2l_range[1], int(resolution))
    return [BlochVector.from_scaled(k1l, k2l, spec.l) for k1l in k1ls for k2l in k2ls]
