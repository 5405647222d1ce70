import math
from dataclasses import dataclass
from typing import List


@dataclass(frozen=True)
class Medium:
    """
    Homogeneous chiral elastic material.

    Attributes:
        lam (float): first Lame constant.
        mu (float): shear modulus.
        rho (float): mass density.
        alpha (float): chiral inertia; |alpha| > rho removes the pressure-type wave.
    """

    lam: float = 1.0
    mu: float = 1.0
    rho: float = 1.0
    alpha: float = 0.0

    def __post_init__(self):
        validate_medium(self)

    @classmethod
    def from_config(cls, config: dict) -> "Medium":
        """Unset (missing or None) values take the defaults; lambda defaults to mu."""
        values = {key: value for key, value in config.items() if value is not None}
        mu = float(values.get("mu", 1.0))
        return cls(
            lam=float(values.get("lambda", mu)),
            mu=mu,
            rho=float(values.get("rho", 1.0)),
            alpha=float(values.get("alpha", 0.0)),
        )

    def shear_wavelength(self, omega: float) -> float:
        return 2.0 * math.pi * math.sqrt(self.mu / self.rho) / omega

    def pressure_wavelength(self, omega: float) -> float:
        return 2.0 * math.pi * math.sqrt((self.lam + 2.0 * self.mu) / self.rho) / omega

    @property
    def pressure_speed(self) -> float:
        return math.sqrt((self.lam + 2.0 * self.mu) / self.rho)


def validate_medium(medium: Medium):
    for name in ["lam", "mu", "rho", "alpha"]:
        value = getattr(medium, name)
        if not math.isfinite(value):
            raise ValueError(f"Medium parameter '{name}' must be finite. Received: {value}")
    if medium.mu <= 0 or medium.rho <= 0:
        raise ValueError(
            f"Medium needs positive mu and rho. Received: mu={medium.mu}, rho={medium.rho}"
        )
    if medium.lam + medium.mu <= 0:
        raise ValueError(f"Medium needs lambda + mu > 0. Received: lambda={medium.lam}")


def continuum_wavenumbers(
    omega: float, lam: float, mu: float, rho: float, alpha: float
) -> List[float]:
    """
    Propagating plane-wave wavenumbers of the chiral continuum, ascending.

    Roots k > 0 of ((lambda + 2 mu) k^2 - rho omega^2)(mu k^2 - rho omega^2) = alpha^2 omega^4:
    two for |alpha| < rho, one otherwise.
    """
    if omega <= 0:
        raise ValueError(f"omega must be positive. Received: {omega}")
    a = (lam + 2.0 * mu) * mu
    b = -rho * omega**2 * (lam + 3.0 * mu)
    c = omega**4 * (rho**2 - alpha**2)
    discriminant = max(b**2 - 4.0 * a * c, 0.0)
    root = math.sqrt(discriminant)
    # (-b + root) / 2a is always positive; the second root comes from the product c / a
    large = (-b + root) / (2.0 * a)
    squares = [large]
    small = c / (a * large)
    if small > 1e-14 * large:
        squares.append(small)
    return sorted(math.sqrt(s) for s in squares)
