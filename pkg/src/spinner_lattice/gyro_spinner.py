import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from .lattice_geometry import Flavor, LatticeSpec


class DegenerateSpinnerError(Exception):
    pass


class SignBranch(Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def sign(self) -> int:
        return 1 if self == SignBranch.PLUS else -1


@dataclass(frozen=True)
class SpinnerBody:
    """
    Gyroscope attached to a lattice junction.

    Attributes:
        I0 (float): transverse moment of inertia I_xx = I_yy.
        I (float): axial moment of inertia I_zz.
        h (float): characteristic length of the spinner.
        sign_branch (SignBranch): branch of the compatible spin rate.
    """

    I0: float
    I: float
    h: float
    sign_branch: SignBranch = SignBranch.PLUS

    def __post_init__(self):
        for name in ["I0", "I", "h"]:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(
                    f"Spinner parameter '{name}' must be positive. Received: {value}"
                )

    @classmethod
    def from_config(cls, config: dict) -> "SpinnerBody":
        return cls(
            I0=float(config.get("i0", 1.0)),
            I=float(config.get("i", 1.0)),
            h=float(config.get("h", 1.0)),
            sign_branch=SignBranch(str(config.get("branch", "plus")).lower()),
        )


@dataclass(frozen=True)
class GyroState:
    """
    Euler-angle state of a spinner: nutation theta, precession phi, spin rate psi_dot.

    Keeping |theta| small is the caller's responsibility.
    """

    theta: float = 0.0
    theta_dot: float = 0.0
    theta_ddot: float = 0.0
    phi: float = 0.0
    phi_dot: float = 0.0
    phi_ddot: float = 0.0
    psi_dot: float = 0.0


def gyro_moments(s: GyroState, b: SpinnerBody) -> Tuple[float, float, float]:
    """
    Moments (Mx, My, Mz) needed to sustain the state at constant spin rate, gravity absent.
    """
    sin_t = math.sin(s.theta)
    cos_t = math.cos(s.theta)
    mx = b.I0 * (s.theta_ddot - s.phi_dot**2 * sin_t * cos_t) + b.I * s.phi_dot * sin_t * (
        s.phi_dot * cos_t + s.psi_dot
    )
    my = sin_t * (
        b.I0 * (s.phi_ddot * sin_t + 2.0 * s.phi_dot * s.theta_dot * cos_t)
        - b.I * s.theta_dot * (s.phi_dot * cos_t + s.psi_dot)
    )
    mz = b.I * (s.phi_ddot * cos_t - s.phi_dot * s.theta_dot * sin_t)
    return mx, my, mz


def precession_rate(b: SpinnerBody, spin_rate: float) -> float:
    """
    Constant precession rate I Omega / (2 I0 - I) compatible with Mx = My = 0.

    Raises:
        DegenerateSpinnerError: If 2 I0 = I.
    """
    denominator = 2.0 * b.I0 - b.I
    if denominator == 0 or abs(denominator) <= 1e-14 * max(b.I0, b.I):
        raise DegenerateSpinnerError(
            f"Precession rate undefined for 2*I0 = I (I0={b.I0}, I={b.I})"
        )
    return b.I * spin_rate / denominator


def compatible_spin_rate(b: SpinnerBody, omega: float) -> float:
    """Spin rate Omega = +-omega (2 I0 - I) / I for which the nutation at omega is free."""
    return b.sign_branch.sign * omega * (2.0 * b.I0 - b.I) / b.I


def spinner_constant(b: SpinnerBody) -> float:
    """Spinner constant alpha = I / h^2; the handedness lives in ``sign_branch``."""
    return b.I / b.h**2


def signed_spinner_constant(b: SpinnerBody) -> float:
    """Spinner constant with the branch sign applied; flipping the branch flips alpha in Sigma."""
    return b.sign_branch.sign * spinner_constant(b)


def compatible_state(
    b: SpinnerBody, omega: float, amplitude: float, t: float
) -> GyroState:
    """
    State on the compatible branch at time t for real nutation theta(t) = amplitude cos(omega t).
    """
    spin_rate = compatible_spin_rate(b, omega)
    phase = omega * t
    return GyroState(
        theta=amplitude * math.cos(phase),
        theta_dot=-amplitude * omega * math.sin(phase),
        theta_ddot=-amplitude * omega**2 * math.cos(phase),
        phi=0.0,
        phi_dot=precession_rate(b, spin_rate),
        phi_ddot=0.0,
        psi_dot=spin_rate,
    )


def induced_moment(b: SpinnerBody, omega: float, theta: float, theta_dot: float) -> float:
    """Small-angle moment about z, -+ I omega theta_dot theta (upper sign for the plus branch)."""
    return -b.sign_branch.sign * b.I * omega * theta_dot * theta


def rotational_force(b: SpinnerBody, omega: float, displacement: complex) -> complex:
    """Rotational force -+ i I omega^2 U / h^2 exerted on the junction."""
    return -b.sign_branch.sign * 1j * b.I * omega**2 * displacement / b.h**2


def gyro_residuals(b: SpinnerBody, omega: float) -> Tuple[float, float]:
    """
    Residuals of the precession relation and of the frequency relation at the compatible state.

    Returns:
        Tuple[float, float]: phi_dot (2 I0 - I) - I Omega, and
            (I - I0) phi_dot^2 + I Omega phi_dot - I0 omega^2.
    """
    spin_rate = compatible_spin_rate(b, omega)
    phi_dot = precession_rate(b, spin_rate)
    first = phi_dot * (2.0 * b.I0 - b.I) - b.I * spin_rate
    second = (b.I - b.I0) * phi_dot**2 + b.I * spin_rate * phi_dot - b.I0 * omega**2
    return first, second


def lattice_from_spinners(
    l: float,
    c: float,
    m1: float,
    m2: float,
    body1: SpinnerBody,
    body2: SpinnerBody,
) -> LatticeSpec:
    """Lattice spec whose junction spinner constants come from two gyroscope bodies."""
    alpha1 = signed_spinner_constant(body1)
    alpha2 = signed_spinner_constant(body2)
    flavor = Flavor.MONATOMIC if (m1 == m2 and alpha1 == alpha2) else Flavor.BIATOMIC
    return LatticeSpec(
        l=l, c=c, m1=m1, m2=m2, alpha1=alpha1, alpha2=alpha2, flavor=flavor
    )
