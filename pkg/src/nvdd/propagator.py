"""Exact NV ⊗ nucleus propagation in the Zeeman basis.

Every segment of the top-hat model has a time-independent generator, so each
one-period unitary is an exact product of 4x4 exponentials. This is the
reference against which the Floquet and closed-form results are checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np
from scipy.linalg import schur

from ._parallel import parallel_map
from .errors import SequenceError
from .operators import IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, nv_coherence
from .pulses import PulseSequence, SequenceFamily
from .spin_model import SpinTarget, dip_period, interaction_hamiltonians, zeeman_hamiltonians

Targets = Union[SpinTarget, Sequence[SpinTarget]]

METHODS = ("exact", "analytic-expected", "analytic-spurious", "floquet-stroboscopic")
ABSCISSAE = ("period", "pulse_count", "global_phase")


@dataclass(frozen=True)
class CoherenceTrace:
    """Coherence L sampled along one abscissa, tagged with the method that produced it."""

    abscissa: str
    x: np.ndarray
    L: np.ndarray
    method: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.abscissa not in ABSCISSAE:
            raise ValueError(f"unknown abscissa {self.abscissa!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        L = np.asarray(self.L, dtype=float)
        if L.size and np.max(np.abs(L)) > 1 + 1e-10:
            raise ValueError("coherence outside [-1, 1]")
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "L", L)


def _as_list(targets: Targets):
    if isinstance(targets, SpinTarget):
        return [targets]
    return list(targets)


def _expm_herm(w, Q, dt):
    return (Q * np.exp(-1j * w * dt)) @ Q.conj().T


@lru_cache(maxsize=256)
def _free_generator(target: SpinTarget, include_A_par: bool):
    if include_A_par:
        h = zeeman_hamiltonians(target)
        H_av, V = h.H_av, h.V
    else:
        H_av, V = interaction_hamiltonians(target, include_A_par=False)
    H = np.kron(IDENTITY_2, H_av) + np.kron(SIGMA_Z, V)
    return H, np.linalg.eigh(H)


@lru_cache(maxsize=4096)
def _pulse_eig(target: SpinTarget, include_A_par: bool, rabi: float, phase: float):
    H_free, _ = _free_generator(target, include_A_par)
    drive = rabi / 2 * (math.cos(phase) * SIGMA_X + math.sin(phase) * SIGMA_Y)
    return np.linalg.eigh(H_free + np.kron(drive, IDENTITY_2))


def one_period_unitary(target: SpinTarget, seq: PulseSequence, include_A_par: bool = False) -> np.ndarray:
    """U(T) as the time-ordered product of free and pulse segment exponentials.

    Basis: NV (m_s=1, m_s=0) ⊗ nuclear Zeeman (up, down). Finite pulses evolve
    under H_0 + rabi (S_x cos phi + S_y sin phi); delta pulses are applied as
    the instantaneous rotation -i sigma_phi.
    """
    _, (w0, Q0) = _free_generator(target, include_A_par)
    slack = 1e-12 * seq.period
    U = np.eye(4, dtype=complex)
    prev = 0.0
    for pulse, phase in zip(seq.pulses, seq.effective_phases):
        dt = pulse.start - prev
        if dt < -slack:
            raise SequenceError("segments do not tile the period")
        U = _expm_herm(w0, Q0, max(dt, 0.0)) @ U
        if pulse.duration > 0:
            w, Q = _pulse_eig(target, include_A_par, pulse.rabi, float(phase))
            U = _expm_herm(w, Q, pulse.duration) @ U
        else:
            kick = -1j * (math.cos(phase) * SIGMA_X + math.sin(phase) * SIGMA_Y)
            U = np.kron(kick, IDENTITY_2) @ U
        prev = pulse.end
    dt = seq.period - prev
    if dt < -slack:
        raise SequenceError("segments do not tile the period")
    return _expm_herm(w0, Q0, max(dt, 0.0)) @ U


class _Powers:
    """Integer powers of a unitary through its Schur (eigen) decomposition."""

    def __init__(self, U):
        T, Z = schur(U, output="complex")
        self.angles = np.angle(np.diag(T))
        self.Z = Z

    def __call__(self, n: int) -> np.ndarray:
        return (self.Z * np.exp(1j * n * self.angles)) @ self.Z.conj().T


def unitary_power(U: np.ndarray, n: int) -> np.ndarray:
    """U**n with unit-modulus eigenvalues, so accuracy does not degrade with n."""
    if n == 0:
        return np.eye(U.shape[0], dtype=complex)
    return _Powers(U)(n)


def coherence_after(targets: Targets, seq: PulseSequence, n_p: int, include_A_par: bool = False) -> float:
    """Product over independent targets of L_j = c Tr[S_x U_j rho_0 U_j^dagger] at t = n_p T."""
    L = 1.0
    for target in _as_list(targets):
        U = unitary_power(one_period_unitary(target, seq, include_A_par), n_p)
        L *= float(nv_coherence(U))
    return L


def _params(targets, family, **extra):
    out = {"targets": [t.as_dict() for t in _as_list(targets)], "sequence": family.as_dict()}
    out.update(extra)
    return out


def coherence_trace(
    targets: Targets,
    family: SequenceFamily,
    n_p: int,
    periods,
    include_A_par: bool = False,
    threads: int = 1,
) -> CoherenceTrace:
    """Exact coherence versus sequence period T after n_p repetitions."""
    if n_p < 1:
        raise ValueError("n_p must be >= 1")
    periods = np.asarray(periods, dtype=float)
    values = parallel_map(
        lambda T: coherence_after(targets, family.at(T), n_p, include_A_par), periods, threads
    )
    return CoherenceTrace(
        "period", periods, np.array(values), "exact",
        _params(targets, family, n_p=n_p, include_A_par=include_A_par),
    )


def coherence_vs_pulse_count(targets: Targets, seq: PulseSequence, n_values, include_A_par: bool = False):
    """Product-over-targets coherence for each repetition count; one Schur form per target."""
    n_values = np.asarray(list(n_values), dtype=int)
    L = np.ones(len(n_values))
    for target in _as_list(targets):
        powers = _Powers(one_period_unitary(target, seq, include_A_par))
        L *= np.array([nv_coherence(powers(int(n))) for n in n_values])
    return L


def pulse_number_scan(
    target: SpinTarget,
    family: SequenceFamily,
    k: int,
    n_values: Iterable[int],
    include_A_par: bool = False,
) -> CoherenceTrace:
    """Exact coherence versus repetition number with T pinned at T_dip^k."""
    T = dip_period(target, k)
    n_values = np.asarray(list(n_values), dtype=int)
    L = coherence_vs_pulse_count(target, family.at(T), n_values, include_A_par)
    return CoherenceTrace(
        "pulse_count", n_values, L, "exact",
        _params(target, family, k=k, period=T, include_A_par=include_A_par),
    )


def global_phase_scan(
    targets: Targets,
    family: SequenceFamily,
    period: float,
    n_p: int,
    phases,
    include_A_par: bool = False,
) -> CoherenceTrace:
    phases = np.asarray(phases, dtype=float)
    L = [coherence_after(targets, family.with_global_phase(g).at(period), n_p, include_A_par) for g in phases]
    return CoherenceTrace(
        "global_phase", phases, np.array(L), "exact",
        _params(targets, family, period=period, n_p=n_p, include_A_par=include_A_par),
    )
