"""NV-nuclear spin model and its average-Hamiltonian description.

All frequencies are angular (rad/s). A target is a single nuclear spin-1/2
coupled to the NV {m_s=0, m_s=1} qubit by a hyperfine vector A = (A_x, 0, A_z)
in the NV frame, with the static field along the NV axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateTargetError, InvalidHarmonicError
from .operators import I_X, I_Z

TWO_PI = 2.0 * math.pi


def from_hz(value):
    """Convert an ordinary frequency in Hz to rad/s."""
    return TWO_PI * value


def _wrap_angle(theta: float) -> float:
    # reduce to (-pi, pi]
    theta = math.remainder(theta, TWO_PI)
    if theta <= -math.pi:
        theta += TWO_PI
    return theta


@dataclass(frozen=True)
class SpinTarget:
    """One nuclear spin with its derived average-Hamiltonian quantities.

    Targets built with :func:`make_target` keep the Zeeman-frame inputs
    (``gamma_n``, ``B0``, ``A_x``, ``A_z``). Targets built with
    :func:`reduced_target` are specified directly in the average-Hamiltonian
    basis and have those fields set to ``None``.
    """

    omega_av: float
    A_perp: float
    A_par: float
    theta_av: float
    gamma_n: Optional[float] = None
    B0: Optional[float] = None
    A_x: Optional[float] = None
    A_z: Optional[float] = None
    label: str = field(default="", compare=False)

    @property
    def is_reduced(self) -> bool:
        return self.gamma_n is None

    def as_dict(self) -> dict:
        return {
            "omega_av": self.omega_av,
            "A_perp": self.A_perp,
            "A_par": self.A_par,
            "theta_av": self.theta_av,
            "gamma_n": self.gamma_n,
            "B0": self.B0,
            "A_x": self.A_x,
            "A_z": self.A_z,
            "label": self.label,
        }


def make_target(gamma_n: float, B0: float, A_x: float, A_z: float, label: str = "") -> SpinTarget:
    """Build a target from its Zeeman-frame parameters.

    Parameters
    ----------
    gamma_n : float
        Nuclear gyromagnetic ratio in rad s^-1 T^-1 (sign retained).
    B0 : float
        Field along the NV axis in tesla.
    A_x, A_z : float
        Hyperfine components in rad/s.

    Raises
    ------
    DegenerateTargetError
        If the average-Hamiltonian frequency vanishes.
    """
    larmor = gamma_n * B0
    omega_av = math.hypot(larmor + A_z / 2, A_x / 2)
    if omega_av == 0.0:
        raise DegenerateTargetError("degenerate target: omega_av = 0, dip period undefined")
    # atan2 keeps the axis orientation consistent when gamma_n * B0 < 0
    theta = _wrap_angle(math.atan2(A_x, 2 * larmor + A_z))
    c, s = math.cos(theta), math.sin(theta)
    A_perp = (A_x * c - A_z * s) / 2
    A_par = (A_z * c + A_x * s) / 2
    return SpinTarget(
        omega_av=omega_av,
        A_perp=A_perp,
        A_par=A_par,
        theta_av=theta,
        gamma_n=gamma_n,
        B0=B0,
        A_x=A_x,
        A_z=A_z,
        label=label,
    )


def reduced_target(omega_av: float, A_perp: float, A_par: float = 0.0, label: str = "") -> SpinTarget:
    """Target given directly by its average-basis frequency and couplings."""
    if omega_av <= 0.0:
        raise DegenerateTargetError("degenerate target: omega_av must be positive")
    return SpinTarget(omega_av=omega_av, A_perp=A_perp, A_par=A_par, theta_av=0.0, label=label)


def dip_period(target: SpinTarget, k: int) -> float:
    """Period T = 2*pi*k/omega_av at which the k-th Floquet degeneracy occurs."""
    if int(k) != k or k < 1:
        raise InvalidHarmonicError(f"harmonic must be a positive integer, got {k!r}")
    return TWO_PI * k / target.omega_av


@dataclass(frozen=True)
class NuclearHamiltonians:
    """Nuclear Hamiltonians conditioned on the NV state (Zeeman basis, rad/s)."""

    H0: np.ndarray
    H1: np.ndarray

    @property
    def H_av(self) -> np.ndarray:
        return (self.H0 + self.H1) / 2

    @property
    def V(self) -> np.ndarray:
        return (self.H1 - self.H0) / 2


def zeeman_hamiltonians(target: SpinTarget) -> NuclearHamiltonians:
    """H0 = gamma_n B0 I_z and H1 = H0 + A_x I_x + A_z I_z.

    Reduced targets have no Zeeman description; their average basis is used
    as the computational basis instead.
    """
    if target.is_reduced:
        H_av, V = interaction_hamiltonians(target, include_A_par=True)
        return NuclearHamiltonians(H0=H_av - V, H1=H_av + V)
    H0 = target.gamma_n * target.B0 * I_Z
    H1 = H0 + target.A_x * I_X + target.A_z * I_Z
    return NuclearHamiltonians(H0=H0, H1=H1)


def interaction_hamiltonians(target: SpinTarget, include_A_par: bool = False):
    """Return ``(H_av, V)`` in the computational (Zeeman) basis.

    With ``include_A_par=False`` the parallel hyperfine component is dropped,
    leaving V = A_perp * I_x' where x' is the average-basis transverse axis.
    """
    c, s = math.cos(target.theta_av), math.sin(target.theta_av)
    z_av = c * I_Z + s * I_X
    x_av = c * I_X - s * I_Z
    H_av = target.omega_av * z_av
    V = target.A_perp * x_av
    if include_A_par:
        V = V + target.A_par * z_av
    return H_av, V


def average_basis(target: SpinTarget) -> np.ndarray:
    """Unitary whose columns are the H_av eigenvectors (+omega_av/2 first) in the Zeeman basis."""
    half = target.theta_av / 2
    # rotation about y by theta_av maps z onto the average quantization axis
    return np.array(
        [[math.cos(half), -math.sin(half)], [math.sin(half), math.cos(half)]], dtype=complex
    )
