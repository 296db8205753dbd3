"""Closed-form coherence near an isolated avoided crossing.

Near T_dip^k only one pair of Floquet levels is nearly degenerate, coupled
by ``A_perp f^k`` with ``f^k`` either ``f_z^k`` (expected dip) or
``f_perp^k`` (spurious dip). The NV coherence after N_p periods is then

    L = 1 - 2 b(T) sin^2(N_p eps T) c,     b = (eps^2 - delta^2/4) / eps^2,

with ``delta = omega_av - k w``, ``eps = sqrt(delta^2 + |A_perp f^k|^2) / 2``
and contrast ``c = cos^2(phi_perp^k + phi_g)`` for spurious dips, ``c = 1``
for expected ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .errors import NoDipError, NVDDError
from .floquet import COEFF_TOL
from .isotopes import canonical_name, gyromagnetic_ratio
from .propagator import CoherenceTrace
from .pulses import PulseSequence, SequenceFamily, fourier_coefficients
from .spin_model import TWO_PI, SpinTarget, dip_period

SeqLike = Union[SequenceFamily, PulseSequence]

VALIDITY_FACTOR = 10.0
MIMIC_TOLERANCE = 0.02


def _wrap_half(angle: float) -> float:
    # reduce modulo pi to (-pi/2, pi/2]
    a = math.remainder(angle, math.pi)
    if a <= -math.pi / 2 + 1e-12:
        a += math.pi
    return a


def _resonant_coefficients(seq: SeqLike, T_dip: float, k: int):
    """(f_z^k, f_perp^k, phi_g) at T_dip, with f_perp taken from the phi_g = 0 sequence."""
    if isinstance(seq, SequenceFamily):
        base, phi_g = seq.with_global_phase(0.0).at(T_dip), seq.global_phase
    else:
        base, phi_g = seq.with_global_phase(0.0), seq.global_phase
    fx, fy, fz = fourier_coefficients(base, np.array([k]))
    return complex(fz[0]), complex(fx[0] + 1j * fy[0]), phi_g


@dataclass(frozen=True)
class DipModel:
    """Isolated two-level description of the k-th crossing.

    Coefficients are evaluated once at T_dip and held fixed across the dip
    window; only the detuning varies with T.
    """

    kind: str
    k: int
    coupling: float
    phase: float
    global_phase: float
    T_dip: float
    omega_av: float

    def detuning(self, T):
        return self.omega_av - self.k * TWO_PI / np.asarray(T, dtype=float)

    def epsilon(self, T):
        return 0.5 * np.hypot(self.detuning(T), self.coupling)

    @property
    def contrast(self) -> float:
        if self.kind == "expected":
            return 1.0
        return math.cos(self.phase + self.global_phase) ** 2

    @property
    def N_p_max(self) -> float:
        return math.pi / (self.coupling * self.T_dip)

    @property
    def W_T(self) -> float:
        return 2 * self.coupling * self.T_dip / self.omega_av

    def valid(self, T):
        """True inside the two-level window |delta| <= 10 |A_perp f^k|."""
        return np.abs(self.detuning(T)) <= VALIDITY_FACTOR * self.coupling

    def _weight(self, T):
        # (eps^2 - delta^2/4) / eps^2 written without cancellation
        d = self.detuning(T)
        return self.coupling**2 / (d * d + self.coupling**2)

    def coherence(self, T, n_p):
        T = np.asarray(T, dtype=float)
        s = np.sin(n_p * self.epsilon(T) * T)
        return 1.0 - 2.0 * self._weight(T) * s * s * self.contrast

    def envelope(self, T):
        return 1.0 - 2.0 * self._weight(T) * self.contrast

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "k": self.k,
            "coupling_rad_s": self.coupling,
            "phase_rad": self.phase,
            "global_phase_rad": self.global_phase,
            "T_dip_s": self.T_dip,
            "N_p_max": self.N_p_max,
            "W_T_s": self.W_T,
        }


def dip_model(target: SpinTarget, seq: SeqLike, k: int, kind: Optional[str] = None) -> DipModel:
    """Build the two-level model of the k-th crossing.

    Parameters
    ----------
    seq : SequenceFamily or PulseSequence
        A family is evaluated at T_dip^k; a fixed sequence is used as given.
    kind : {'expected', 'spurious'}, optional
        Defaults to 'expected' when f_z^k is nonzero, else 'spurious'.

    Raises
    ------
    NoDipError
        If the coefficient for the requested kind vanishes.
    """
    T_dip = dip_period(target, k)
    f_z, f_perp, phi_g = _resonant_coefficients(seq, T_dip, k)
    if kind is None:
        kind = "expected" if abs(f_z) > COEFF_TOL else "spurious"
    if kind == "expected":
        coeff, phase = abs(f_z), 0.0
    elif kind == "spurious":
        coeff, phase = abs(f_perp), (float(np.angle(f_perp)) if abs(f_perp) > COEFF_TOL else 0.0)
    else:
        raise NVDDError(f"kind must be 'expected' or 'spurious', got {kind!r}")
    coupling = abs(target.A_perp) * coeff
    if coeff <= COEFF_TOL or coupling == 0.0:
        raise NoDipError(f"no {kind} dip at k = {k}: coupling vanishes")
    return DipModel(kind, int(k), coupling, phase, phi_g, T_dip, target.omega_av)


def expected_coherence(target: SpinTarget, seq: SeqLike, k: int, n_p: int, T):
    """Expected-dip coherence; independent of every pulse phase."""
    return dip_model(target, seq, k, "expected").coherence(T, n_p)


def spurious_coherence(target: SpinTarget, seq: SeqLike, k: int, n_p: int, T):
    """Spurious-dip coherence including the cos^2(phi_perp^k + phi_g) contrast."""
    return dip_model(target, seq, k, "spurious").coherence(T, n_p)


def dip_envelope(target: SpinTarget, seq: SeqLike, k: int, T):
    """N_p-independent lower envelope of the spurious dip."""
    return dip_model(target, seq, k, "spurious").envelope(T)


def optimal_pulse_number(target: SpinTarget, seq: SeqLike, k: int, kind: str = "spurious"):
    """Return ``(N_p_max, nearest integer >= 1)`` giving full contrast at T_dip^k."""
    n = dip_model(target, seq, k, kind).N_p_max
    return n, max(1, int(round(n)))


def analytic_trace(target: SpinTarget, seq: SeqLike, k: int, n_p: int, periods, kind: Optional[str] = None):
    model = dip_model(target, seq, k, kind)
    periods = np.asarray(periods, dtype=float)
    return CoherenceTrace(
        "period",
        periods,
        model.coherence(periods, n_p),
        f"analytic-{model.kind}",
        {
            "target": target.as_dict(),
            "sequence": seq.as_dict(),
            "n_p": n_p,
            "dip": model.as_dict(),
            "valid": model.valid(periods).tolist(),
        },
    )


# --------------------------------------------------------------------------- isotope mimics


@dataclass(frozen=True)
class MimicResult:
    primary: str
    mimic: str
    found: bool
    k: Optional[int] = None
    harmonic: Optional[Fraction] = None
    global_phase: Optional[float] = None
    k_exact: Optional[float] = None
    phase: Optional[float] = None
    coupling_coefficient: Optional[float] = None

    def as_dict(self) -> dict:
        return {
            "primary": self.primary,
            "mimic": self.mimic,
            "found": self.found,
            "k": self.k,
            "harmonic": None if self.harmonic is None else str(self.harmonic),
            "global_phase_rad": self.global_phase,
            "k_exact": self.k_exact,
            "phi_perp_rad": self.phase,
            "abs_f_perp": self.coupling_coefficient,
        }


def mimic_analysis(
    primary: str,
    mimic: str,
    B0: float,
    family: SequenceFamily,
    tolerance: float = MIMIC_TOLERANCE,
) -> MimicResult:
    """Check whether a spurious harmonic of ``mimic`` lands on the fundamental dip of ``primary``.

    Far-field limit: omega_av = |gamma| B0 for both species. The primary's
    fundamental sits at T0 = 2 pi k0 / omega_p (k0 = 4 for XY8); the mimic
    shows its k-th dip there when k = k0 omega_m / omega_p is an integer
    (relative tolerance ``tolerance``). The harmonic label is n = k0 / k and
    the suppressing global phase is -phi_perp^k + pi/2 reduced to (-pi/2, pi/2].
    """
    primary, mimic = canonical_name(primary), canonical_name(mimic)
    w_p = abs(gyromagnetic_ratio(primary)) * B0
    w_m = abs(gyromagnetic_ratio(mimic)) * B0
    k0 = family.fundamental_harmonic
    k_exact = k0 * w_m / w_p
    k = int(round(k_exact))
    if k < 1 or abs(k_exact / k - 1) > tolerance:
        return MimicResult(primary, mimic, False, k_exact=k_exact)
    T0 = TWO_PI * k0 / w_p
    fx, fy, _ = fourier_coefficients(family.with_global_phase(0.0).at(T0), np.array([k]))
    f_perp = complex(fx[0] + 1j * fy[0])
    if abs(f_perp) <= COEFF_TOL:
        # this sequence cannot produce the mimic signal at all
        return MimicResult(primary, mimic, False, k=k, k_exact=k_exact, coupling_coefficient=abs(f_perp))
    phase = float(np.angle(f_perp))
    return MimicResult(
        primary,
        mimic,
        True,
        k=k,
        harmonic=Fraction(k0, k),
        global_phase=_wrap_half(-phase + math.pi / 2),
        k_exact=k_exact,
        phase=phase,
        coupling_coefficient=abs(f_perp),
    )
