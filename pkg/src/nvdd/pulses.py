"""Periodic pi-pulse sequences, their rotating-frame modulation functions and
Fourier coefficients.

In the frame that follows the pulses, the NV sigma_z becomes
``f_x(t) sigma_x + f_y(t) sigma_y + f_z(t) sigma_z``. The Fourier amplitudes
``f_i^k = (1/T) int_0^T f_i(t) exp(-i k w t) dt`` with ``w = 2 pi / T`` play the
role of generalized filter functions: ``f_z^k`` opens the ordinary ("expected")
crossings and ``f_perp^k = f_x^k + i f_y^k`` the finite-pulse ("spurious") ones.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import NVDDError, SequenceError
from .operators import SIGMA_X, SIGMA_Y

TWO_PI = 2.0 * math.pi
PI_PULSE_TOL = 1e-9
BALANCE_TOL = 1e-9

_BUILTIN_PHASES = {
    "xy8": (0.0, 0.5 * math.pi, 0.0, 0.5 * math.pi, 0.5 * math.pi, 0.0, 0.5 * math.pi, 0.0),
    "cpmg8": (0.0,) * 8,
    "xy4": (0.0, 0.5 * math.pi, 0.0, 0.5 * math.pi),
}


@dataclass(frozen=True)
class Pulse:
    """Top-hat pi pulse. ``duration == 0`` is the ideal delta-pulse limit."""

    center: float
    phase: float
    rabi: float
    duration: float = 0.0

    def __post_init__(self):
        if self.duration < 0:
            raise SequenceError(f"pulse duration must be >= 0, got {self.duration}")
        if self.duration > 0:
            if self.rabi <= 0:
                raise SequenceError("finite pulses need a positive Rabi frequency")
            if abs(self.rabi * self.duration - math.pi) > PI_PULSE_TOL * math.pi:
                raise SequenceError(
                    "only pi pulses are supported: rabi * duration must equal pi "
                    f"(got {self.rabi * self.duration:.12g})"
                )

    @property
    def start(self) -> float:
        return self.center - self.duration / 2

    @property
    def end(self) -> float:
        return self.center + self.duration / 2


@dataclass(frozen=True)
class PulseSequence:
    """One period of a pulse sequence.

    The global phase is kept separate from the pulse phases: the phase actually
    applied to pulse m is ``pulses[m].phase + global_phase``.
    """

    period: float
    pulses: tuple
    global_phase: float = 0.0
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        pulses = tuple(self.pulses)
        object.__setattr__(self, "pulses", pulses)
        T = self.period
        if not T > 0:
            raise SequenceError(f"period must be positive, got {T}")
        if not pulses:
            raise SequenceError("a sequence needs at least one pulse")
        if len(pulses) % 2:
            raise SequenceError("an odd number of pi pulses does not return the frame each period")
        slack = 1e-12 * T
        for p in pulses:
            if p.start < -slack or p.end > T + slack:
                raise SequenceError(f"pulse at {p.center:g} s extends outside [0, T]")
        for a, b in zip(pulses, pulses[1:]):
            if b.center < a.center:
                raise SequenceError("pulses must be sorted by center")
            if b.start < a.end or (a.duration == 0 and b.duration == 0 and b.center == a.center):
                raise SequenceError("pulse supports overlap")
        if not _net_rotation_is_identity(self.effective_phases):
            raise SequenceError("net rotation over one period is not proportional to identity")
        fz0 = _fz_mean(self)
        if abs(fz0) > BALANCE_TOL:
            warnings.warn(
                f"unbalanced sequence: f_z^0 = {fz0:.3g} (nonzero mean of the modulation function)",
                stacklevel=3,
            )

    @property
    def n_pulses(self) -> int:
        return len(self.pulses)

    @property
    def omega(self) -> float:
        return TWO_PI / self.period

    @property
    def effective_phases(self) -> np.ndarray:
        return np.array([p.phase for p in self.pulses]) + self.global_phase

    @property
    def centers(self) -> np.ndarray:
        return np.array([p.center for p in self.pulses])

    @property
    def durations(self) -> np.ndarray:
        return np.array([p.duration for p in self.pulses])

    @property
    def is_ideal(self) -> bool:
        return all(p.duration == 0 for p in self.pulses)

    def with_global_phase(self, global_phase: float) -> "PulseSequence":
        return replace(self, global_phase=global_phase)

    def frame_phases(self) -> np.ndarray:
        """Azimuth of (f_x, f_y) during each pulse, including the global phase.

        varphi_m = 2 sum_{j<m} (-1)^{j+1} phi_j + (-1)^{m+1} (phi_m + pi/2),
        with phi_j the effective (global-phase shifted) pulse phases.
        """
        phis = self.effective_phases
        out = np.empty(len(phis))
        acc = 0.0
        for m, phi in enumerate(phis, start=1):
            sign = 1.0 if m % 2 else -1.0
            out[m - 1] = 2 * acc + sign * (phi + math.pi / 2)
            acc += sign * phi
        return out

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "period": self.period,
            "global_phase": self.global_phase,
            "pulses": [
                {"center": p.center, "phase": p.phase, "rabi": p.rabi, "duration": p.duration}
                for p in self.pulses
            ],
        }


def _net_rotation_is_identity(phases) -> bool:
    U = np.eye(2, dtype=complex)
    for phi in phases:
        U = -1j * (math.cos(phi) * SIGMA_X + math.sin(phi) * SIGMA_Y) @ U
    return abs(U[0, 1]) < 1e-9 and abs(U[0, 0] - U[1, 1]) < 1e-9


def _fz_mean(seq: PulseSequence) -> float:
    # f_z over a symmetric pulse integrates to zero, so only free segments count
    total, prev, sign = 0.0, 0.0, 1.0
    for p in seq.pulses:
        total += sign * (p.start - prev)
        sign, prev = -sign, p.end
    total += sign * (seq.period - prev)
    return total / seq.period


def periodic_sequence(
    phases: Sequence[float],
    tau: float,
    rabi: float,
    global_phase: float = 0.0,
    t_p: Optional[float] = None,
    name: str = "custom",
) -> PulseSequence:
    """Equally spaced pi pulses centered at (m - 1/2) tau, period len(phases) * tau.

    ``t_p`` defaults to pi / rabi. Passing ``t_p = 0`` gives ideal delta pulses;
    any other override keeps the pulses at pi rotations by setting rabi = pi / t_p.
    """
    if rabi <= 0:
        raise SequenceError(f"rabi must be positive, got {rabi}")
    if t_p is None:
        t_p = math.pi / rabi
    elif t_p > 0:
        rabi = math.pi / t_p
    elif t_p < 0:
        raise SequenceError("t_p must be non-negative")
    if not tau > t_p:
        raise SequenceError(f"pulses overlap: tau = {tau:g} s must exceed t_p = {t_p:g} s")
    pulses = tuple(
        Pulse(center=(m + 0.5) * tau, phase=phi, rabi=rabi, duration=t_p)
        for m, phi in enumerate(phases)
    )
    return PulseSequence(period=len(phases) * tau, pulses=pulses, global_phase=global_phase, name=name)


def xy8(tau: float, rabi: float, global_phase: float = 0.0, t_p: Optional[float] = None) -> PulseSequence:
    """XY8 unit (X Y X Y Y X Y X), period 8 tau."""
    return periodic_sequence(_BUILTIN_PHASES["xy8"], tau, rabi, global_phase, t_p, name="xy8")


def cpmg8(tau: float, rabi: float, global_phase: float = 0.0, t_p: Optional[float] = None) -> PulseSequence:
    """Eight X pulses at the XY8 positions, period 8 tau."""
    return periodic_sequence(_BUILTIN_PHASES["cpmg8"], tau, rabi, global_phase, t_p, name="cpmg8")


def xy4(tau: float, rabi: float, global_phase: float = 0.0, t_p: Optional[float] = None) -> PulseSequence:
    return periodic_sequence(_BUILTIN_PHASES["xy4"], tau, rabi, global_phase, t_p, name="xy4")


BUILTINS = {"xy8": xy8, "cpmg8": cpmg8, "xy4": xy4}


@dataclass(frozen=True)
class SequenceFamily:
    """A builtin sequence rebuilt for each period with a fixed pulse count (tau = T / n)."""

    name: str
    rabi: float
    global_phase: float = 0.0
    t_p: Optional[float] = None

    def __post_init__(self):
        if self.name not in BUILTINS:
            raise NVDDError(f"unknown sequence {self.name!r}; expected one of {sorted(BUILTINS)}")

    @property
    def n_pulses(self) -> int:
        return len(_BUILTIN_PHASES[self.name])

    @property
    def fundamental_harmonic(self) -> int:
        """Harmonic k of the fundamental expected dip (pulse spacing tau = pi / omega_av)."""
        return self.n_pulses // 2

    def at(self, period: float) -> PulseSequence:
        return BUILTINS[self.name](period / self.n_pulses, self.rabi, self.global_phase, self.t_p)

    def with_global_phase(self, global_phase: float) -> "SequenceFamily":
        return replace(self, global_phase=global_phase)

    def ideal(self) -> "SequenceFamily":
        return replace(self, t_p=0.0)

    def as_dict(self) -> dict:
        return {"name": self.name, "rabi": self.rabi, "global_phase": self.global_phase, "t_p": self.t_p}


# --------------------------------------------------------------------------- modulation


def modulation_functions(seq: PulseSequence, t):
    """Vectorized (f_x, f_y, f_z) on an array of times in [0, T)."""
    t = np.asarray(t, dtype=float)
    fx = np.zeros_like(t)
    fy = np.zeros_like(t)
    fz = np.ones_like(t)
    varphi = seq.frame_phases()
    for m, p in enumerate(seq.pulses, start=1):
        after = t >= p.end
        fz = np.where(after, (-1.0) ** m, fz)
        if p.duration > 0:
            inside = (t >= p.start) & (t < p.end)
            tp = t - p.center
            c = np.cos(p.rabi * tp)
            fx = np.where(inside, c * math.cos(varphi[m - 1]), fx)
            fy = np.where(inside, c * math.sin(varphi[m - 1]), fy)
            fz = np.where(inside, (-1.0) ** m * np.sin(p.rabi * tp), fz)
    return fx, fy, fz


def modulation_at(seq: PulseSequence, t: float):
    """Modulation functions at a single time 0 <= t < T."""
    if not 0.0 <= t < seq.period:
        raise NVDDError(f"t = {t!r} outside [0, T)")
    fx, fy, fz = modulation_functions(seq, np.array([t]))
    return float(fx[0]), float(fy[0]), float(fz[0])


def _free_integral(kappa, a, b):
    """int_a^b exp(-i kappa t) dt, with kappa > 0 elementwise or exactly 0."""
    out = np.empty(kappa.shape, dtype=complex)
    nz = kappa != 0
    kn = kappa[nz]
    out[nz] = (np.exp(-1j * kn * a) - np.exp(-1j * kn * b)) / (1j * kn)
    out[~nz] = b - a
    return out


def _fourier_nonnegative(seq: PulseSequence, k: np.ndarray):
    T = seq.period
    kappa = k * (TWO_PI / T)
    fx = np.zeros(k.shape, dtype=complex)
    fy = np.zeros(k.shape, dtype=complex)
    fz = np.zeros(k.shape, dtype=complex)
    varphi = seq.frame_phases()
    prev, sign = 0.0, 1.0
    for m, p in enumerate(seq.pulses, start=1):
        fz += sign * _free_integral(kappa, prev, p.start)
        if p.duration > 0:
            h = p.duration / 2
            # int_{-h}^{h} cos(a t) dt = 2h sinc(a h / pi) (numpy's normalized sinc)
            s_minus = np.sinc((p.rabi - kappa) * h / math.pi)
            s_plus = np.sinc((p.rabi + kappa) * h / math.pi)
            shift = np.exp(-1j * kappa * p.center)
            cos_part = shift * h * (s_minus + s_plus)
            sin_part = shift * (-1j * h) * (s_minus - s_plus)
            fx += math.cos(varphi[m - 1]) * cos_part
            fy += math.sin(varphi[m - 1]) * cos_part
            fz += (-1.0) ** m * sin_part
        sign, prev = -sign, p.end
    fz += sign * _free_integral(kappa, prev, T)
    return fx / T, fy / T, fz / T


def fourier_coefficients(seq: PulseSequence, ks):
    """Closed-form (f_x^k, f_y^k, f_z^k) for an array of integer harmonics.

    Negative harmonics are returned as exact complex conjugates of the
    positive ones.
    """
    ks = np.asarray(ks)
    if ks.size and not np.all(ks == np.round(ks)):
        raise NVDDError("harmonics must be integers")
    absk = np.abs(ks).astype(float)
    fx, fy, fz = _fourier_nonnegative(seq, absk)
    neg = ks < 0
    for arr in (fx, fy, fz):
        arr[neg] = np.conj(arr[neg])
    return fx, fy, fz


def fourier_coefficient(seq: PulseSequence, axis: str, k: int) -> complex:
    """Single coefficient; ``axis`` is one of 'x', 'y', 'z', 'perp'."""
    fx, fy, fz = fourier_coefficients(seq, np.array([k]))
    values = {"x": fx[0], "y": fy[0], "z": fz[0], "perp": fx[0] + 1j * fy[0]}
    try:
        return complex(values[axis])
    except KeyError:
        raise NVDDError(f"axis must be one of {sorted(values)}, got {axis!r}") from None


@dataclass(frozen=True)
class ModulationSpectrum:
    """Fourier coefficients of the modulation functions for k in [-k_max, k_max]."""

    k: np.ndarray
    fx: np.ndarray
    fy: np.ndarray
    fz: np.ndarray

    @property
    def k_max(self) -> int:
        return int(self.k[-1])

    @property
    def fperp(self) -> np.ndarray:
        return self.fx + 1j * self.fy

    @property
    def fperp_abs(self) -> np.ndarray:
        return np.abs(self.fperp)

    @property
    def fperp_phase(self) -> np.ndarray:
        return np.angle(self.fperp)

    @property
    def parseval(self) -> float:
        """sum_k |f_x^k|^2 + |f_y^k|^2 + |f_z^k|^2; tends to 1 as k_max grows."""
        return float(np.sum(np.abs(self.fx) ** 2 + np.abs(self.fy) ** 2 + np.abs(self.fz) ** 2))

    def index(self, k: int) -> int:
        return int(k) + self.k_max

    def coefficient(self, axis: str, k: int) -> complex:
        i = self.index(k)
        return complex({"x": self.fx, "y": self.fy, "z": self.fz, "perp": self.fperp}[axis][i])


def modulation_spectrum(seq: PulseSequence, k_max: int) -> ModulationSpectrum:
    if k_max < 1:
        raise NVDDError("k_max must be >= 1")
    k = np.arange(-k_max, k_max + 1)
    fx, fy, fz = fourier_coefficients(seq, k)
    return ModulationSpectrum(k=k, fx=fx, fy=fy, fz=fz)
