"""Truncated Floquet Hamiltonian in the dressed-state basis |m_s, alpha, l>.

Basis index = 4 * (l + L) + 2 * s + a, with s = 0 for sigma_z = +1 (m_s = 1),
s = 1 for sigma_z = -1 (m_s = 0), and a = 0 / 1 for the +omega_av/2 / -omega_av/2
eigenstates of the average nuclear Hamiltonian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import linear_sum_assignment, minimize_scalar

from ._parallel import parallel_map
from .errors import ClosedCrossingError, InvalidHarmonicError, TruncationError
from .operators import I_X, I_Z, PAULIS
from .pulses import PulseSequence, SequenceFamily, fourier_coefficients
from .spin_model import TWO_PI, SpinTarget, dip_period

COEFF_TOL = 1e-10
TRUNCATION_MARGIN = 2
NEIGHBOUR_FRACTION = 0.4


def default_truncation(target: SpinTarget, period: float) -> int:
    return max(16, 4 * math.ceil(target.omega_av * period / TWO_PI))


def fold(eps, omega):
    """Map quasienergies into the first Brillouin zone (-omega/2, omega/2]."""
    return omega / 2 - np.mod(omega / 2 - np.asarray(eps), omega)


def _average_basis_terms(target: SpinTarget, include_A_par: bool):
    energies = np.array([1.0, -1.0, 1.0, -1.0]) * target.omega_av / 2
    V = target.A_perp * I_X
    if include_A_par:
        V = V + target.A_par * I_Z
    couplings = {axis: np.kron(P, V) for axis, P in PAULIS.items()}
    return energies, couplings


@dataclass(frozen=True)
class FloquetMatrix:
    matrix: np.ndarray
    truncation: int
    period: float
    target: SpinTarget
    sequence: PulseSequence
    include_A_par: bool = False

    @property
    def omega(self) -> float:
        return TWO_PI / self.period

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def l_values(self) -> np.ndarray:
        return np.repeat(np.arange(-self.truncation, self.truncation + 1), 4)


def build_floquet(
    target: SpinTarget,
    seq: PulseSequence,
    truncation: Optional[int] = None,
    include_A_par: bool = False,
    max_harmonic: Optional[int] = None,
) -> FloquetMatrix:
    """Assemble the Hermitian Floquet matrix for one sequence period.

    Diagonal entries are ±omega_av/2 + l*omega; the block (l, l') carries
    sum_i f_i^{l-l'} sigma_i ⊗ V with V = A_perp I_x (+ A_par I_z).
    """
    T = seq.period
    needed = math.ceil(target.omega_av * T / TWO_PI) + TRUNCATION_MARGIN
    L = default_truncation(target, T) if truncation is None else int(truncation)
    if L < needed:
        raise TruncationError(f"truncation L = {L} too small; need at least {needed} for this period")
    if max_harmonic is not None and max_harmonic > L:
        raise TruncationError(f"requested harmonic {max_harmonic} exceeds truncation L = {L}")

    n = 2 * L + 1
    ks = np.arange(-2 * L, 2 * L + 1)
    fx, fy, fz = fourier_coefficients(seq, ks)
    energies, C = _average_basis_terms(target, include_A_par)
    blocks = (
        fx[:, None, None] * C["x"] + fy[:, None, None] * C["y"] + fz[:, None, None] * C["z"]
    )
    l = np.arange(-L, L + 1)
    diff = l[:, None] - l[None, :] + 2 * L
    H = blocks[diff].transpose(0, 2, 1, 3).reshape(4 * n, 4 * n)
    H[np.diag_indices(4 * n)] += np.tile(energies, n) + np.repeat(l * (TWO_PI / T), 4)
    return FloquetMatrix(H, L, T, target, seq, include_A_par)


@dataclass(frozen=True)
class FloquetStates:
    """The four physical Floquet states (one replica each) of a truncated matrix."""

    quasienergies: np.ndarray  # unfolded eigenvalues of the selected replicas
    vectors: np.ndarray  # (dim, 4) eigenvectors
    mean_l: np.ndarray
    omega: float

    @property
    def folded(self) -> np.ndarray:
        return fold(self.quasienergies, self.omega)


def _select_replicas(mean_l: np.ndarray, L: int) -> np.ndarray:
    # Replicas of one Floquet family have <l> shifted by exactly one. Place a
    # unit window [b-1, b) around l=0 with b inside the widest gap of the
    # fractional parts so that each family contributes exactly one member.
    inner = np.abs(mean_l) <= L / 2
    frac = np.sort(np.mod(mean_l[inner], 1.0))
    gaps = np.diff(np.concatenate([frac, [frac[0] + 1.0]]))
    j = int(np.argmax(gaps))
    b = math.fmod(frac[j] + gaps[j] / 2, 1.0)
    if b <= 0.0:
        b += 1.0
    chosen = np.flatnonzero((mean_l >= b - 1.0) & (mean_l < b))
    if len(chosen) != 4:
        chosen = np.argsort(np.abs(mean_l - (b - 0.5)))[:4]
    return chosen


def floquet_states(fm: FloquetMatrix) -> FloquetStates:
    # the physical replicas (<l> near 0) sit within omega_av/2 + |A| of zero;
    # only that slice of the spectrum is needed
    half = fm.target.omega_av / 2 + math.hypot(fm.target.A_perp, fm.target.A_par) + 2 * fm.omega
    if 2 * half < 0.5 * (2 * fm.truncation + 1) * fm.omega:
        evals, evecs = eigh(fm.matrix, subset_by_value=(-half, half), driver="evr")
    else:
        evals, evecs = np.linalg.eigh(fm.matrix)
    weights = np.abs(evecs) ** 2
    mean_l = fm.l_values @ weights
    chosen = _select_replicas(mean_l, fm.truncation)
    order = chosen[np.argsort(fold(evals[chosen], fm.omega))]
    return FloquetStates(evals[order], evecs[:, order], mean_l[order], fm.omega)


def quasienergies(fm: FloquetMatrix) -> np.ndarray:
    """Sorted quasienergies folded to (-omega/2, omega/2]."""
    return np.sort(floquet_states(fm).folded)


def floquet_unitary(fm: FloquetMatrix, n_p: int = 1) -> np.ndarray:
    """Stroboscopic propagator U(n_p T) = D exp(-i Lambda n_p T) D^-1 in the average basis.

    D collects the l-summed components of the four selected Floquet states.
    """
    states = floquet_states(fm)
    n = 2 * fm.truncation + 1
    D = states.vectors.reshape(n, 4, 4).sum(axis=0)
    phases = np.exp(-1j * states.quasienergies * n_p * fm.period)
    return D @ np.diag(phases) @ np.linalg.inv(D)


def converged_quasienergies(
    target: SpinTarget,
    seq: PulseSequence,
    rtol: float = 1e-9,
    include_A_par: bool = False,
    max_truncation: int = 512,
):
    """Quasienergies with L doubled until they move by less than ``rtol * omega``.

    Returns ``(quasienergies, L)``. The slowly decaying square-wave harmonics
    make the default truncation accurate only to ~1e-7 omega.
    """
    omega = TWO_PI / seq.period
    L = default_truncation(target, seq.period)
    q = quasienergies(build_floquet(target, seq, L, include_A_par))
    while 2 * L <= max_truncation:
        L *= 2
        q_new = quasienergies(build_floquet(target, seq, L, include_A_par))
        change = np.max(np.abs(fold(q_new - q, omega)))
        q = q_new
        if change < rtol * omega:
            return q, L
    raise TruncationError(f"quasienergies not converged to {rtol:g} omega at L = {L}")


@dataclass(frozen=True)
class FloquetSpectrum:
    periods: np.ndarray
    quasienergies: np.ndarray  # (n_T, 4), folded and sorted per period

    def tracked(self) -> np.ndarray:
        """Continuous (unfolded) level curves across T.

        Each new point is matched to the linear extrapolation of its level's
        last two points (plain nearest-neighbour matching would reflect
        levels at exact crossings).
        """
        out = np.empty_like(self.quasienergies)
        out[0] = self.quasienergies[0]
        for i in range(1, len(self.periods)):
            omega = TWO_PI / self.periods[i]
            prev = out[i - 1]
            if i >= 2:
                dT = self.periods[i] - self.periods[i - 1]
                prev = prev + (out[i - 1] - out[i - 2]) * dT / (self.periods[i - 1] - self.periods[i - 2])
            cur = self.quasienergies[i]
            # nearest periodic image of each new level to each predicted level
            shift = np.round((prev[:, None] - cur[None, :]) / omega)
            images = cur[None, :] + shift * omega
            rows, cols = linear_sum_assignment(np.abs(images - prev[:, None]))
            out[i, rows] = images[rows, cols]
        return out


def quasienergy_scan(
    target: SpinTarget,
    family: SequenceFamily,
    periods,
    truncation: Optional[int] = None,
    include_A_par: bool = False,
    threads: int = 1,
) -> FloquetSpectrum:
    periods = np.asarray(periods, dtype=float)

    def one(T):
        return quasienergies(build_floquet(target, family.at(T), truncation, include_A_par))

    rows = parallel_map(one, periods, threads)
    return FloquetSpectrum(periods, np.array(rows))


# --------------------------------------------------------------------------- crossings


def _circular_spread(values: np.ndarray, omega: float) -> float:
    rel = fold(values - values[0], omega)
    return float(rel.max() - rel.min())


def classify_harmonic(seq: PulseSequence, k: int, tol: float = COEFF_TOL):
    """Return (kind, coincidence, f_z^k, f_perp^k) from the coefficients at harmonic k."""
    fx, fy, fz = fourier_coefficients(seq, np.array([k]))
    f_z, f_perp = complex(fz[0]), complex(fx[0] + 1j * fy[0])
    has_z, has_perp = abs(f_z) > tol, abs(f_perp) > tol
    if has_z:
        return "expected", has_perp, f_z, f_perp
    if has_perp:
        return "spurious", False, f_z, f_perp
    return "closed", False, f_z, f_perp


@dataclass(frozen=True)
class CrossingGap:
    k: int
    T_dip: float
    T_min: float
    gap: float
    predicted_gap: float
    kind: str
    coincidence: bool
    f_z: complex
    f_perp: complex

    @property
    def scaled_gap(self) -> float:
        """Gap in the dimensionless epsilon*T units of a quasienergy-vs-period plot."""
        return self.gap * self.T_min

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "T_dip_s": self.T_dip,
            "T_min_s": self.T_min,
            "gap_rad_s": self.gap,
            "predicted_gap_rad_s": self.predicted_gap,
            "kind": self.kind,
            "coincidence": self.coincidence,
        }


def crossing_gap(
    target: SpinTarget,
    family: SequenceFamily,
    k: int,
    truncation: Optional[int] = None,
    include_A_par: bool = False,
) -> CrossingGap:
    """Minimal splitting of the avoided crossing near T_dip^k.

    The splitting (spread of the four physical quasienergies, which cluster
    at the crossing) is minimized with bounded Brent search over
    T_dip * (1 ± 5 |A_perp f^k| / omega_av); the window doubles if the
    minimum lands on its edge. The window never exceeds 0.4 / k in relative
    period, which keeps the k ± 1 crossings out of the search.
    """
    if k < 1:
        raise InvalidHarmonicError("k must be >= 1")
    T_dip = dip_period(target, k)
    kind, coincidence, f_z, f_perp = classify_harmonic(family.at(T_dip), k)
    coeff = {"expected": abs(f_z), "spurious": abs(f_perp), "closed": 0.0}[kind]
    predicted = abs(target.A_perp) * coeff

    def spread(T):
        fm = build_floquet(target, family.at(T), truncation, include_A_par, max_harmonic=k)
        return _circular_spread(floquet_states(fm).folded, TWO_PI / T)

    # neighbouring crossings sit 1/k away in relative period and must stay outside
    max_rel = NEIGHBOUR_FRACTION / k
    rel_width = min(5 * predicted / target.omega_av if predicted > 0 else 1e-4, max_rel)
    while True:
        width = rel_width * T_dip
        res = minimize_scalar(
            lambda x: spread(T_dip + x * width), bounds=(-1.0, 1.0), method="bounded",
            options={"xatol": 1e-9},
        )
        if abs(res.x) < 0.98 or rel_width >= max_rel:
            break
        rel_width = min(2 * rel_width, max_rel)
    return CrossingGap(
        k=k,
        T_dip=T_dip,
        T_min=T_dip + res.x * width,
        gap=float(res.fun),
        predicted_gap=predicted,
        kind=kind,
        coincidence=coincidence,
        f_z=f_z,
        f_perp=f_perp,
    )


# --------------------------------------------------------------------------- two-level reduction


def _resonant_couplings(target: SpinTarget, seq: PulseSequence, k: int):
    fx, fy, fz = fourier_coefficients(seq, np.array([k, -k]))
    half = target.A_perp / 2
    g_z = half * np.conj(fz[0])  # (+,up,l) <-> (+,down,l+k)
    g_a = half * np.conj(fx[0] + 1j * fy[0])  # (+,up,l) <-> (-,down,l+k)
    g_b = half * np.conj(fx[1] + 1j * fy[1])  # (+,down,l+k) <-> (-,up,l)
    return complex(g_z), complex(g_a), complex(g_b)


def effective_hamiltonian(target: SpinTarget, seq: PulseSequence, k: int) -> np.ndarray:
    """4x4 resonant Hamiltonian near T_dip^k keeping only the harmonic-k couplings.

    Basis (sigma_z=+1, up), (+1, down), (-1, up), (-1, down); energies are
    measured from the crossing centre, so the diagonal is ±(omega_av - k omega)/2.
    """
    delta = target.omega_av - k * TWO_PI / seq.period
    g_z, g_a, g_b = _resonant_couplings(target, seq, k)
    H = np.diag([delta / 2, -delta / 2, delta / 2, -delta / 2]).astype(complex)
    H[0, 1], H[2, 3] = g_z, -g_z
    H[0, 3] = g_a
    H[1, 2] = g_b
    return H + np.triu(H, 1).conj().T


def _two_level(a: float, g: complex, t: float) -> np.ndarray:
    # exp(-i t [[a, g], [g*, -a]])
    eps = math.hypot(a, abs(g))
    if eps == 0.0:
        return np.eye(2, dtype=complex)
    c, s = math.cos(eps * t), math.sin(eps * t)
    return np.array(
        [[c - 1j * s * a / eps, -1j * s * g / eps], [-1j * s * np.conj(g) / eps, c + 1j * s * a / eps]]
    )


def stroboscopic_propagator(target: SpinTarget, seq: PulseSequence, k: int, n_p: int) -> np.ndarray:
    """Two-level-reduced U(n_p T) near the k-th crossing, in the average basis.

    Expected crossings give the block form built from u_a, u_b; spurious ones
    couple (+,up)<->(-,down) and (+,down)<->(-,up) through v_a, v_b with the
    phase of f_perp^k. If both couplings are present (CPMG coincidence) the
    full resonant 4x4 Hamiltonian is exponentiated instead.
    """
    kind, coincidence, _, _ = classify_harmonic(seq, k)
    if kind == "closed":
        raise ClosedCrossingError(f"no coupling opens the k = {k} crossing for this sequence")
    t = n_p * seq.period
    phase = np.exp(-1j * k * n_p * math.pi)
    if coincidence:
        w, Q = np.linalg.eigh(effective_hamiltonian(target, seq, k))
        return phase * (Q * np.exp(-1j * w * t)) @ Q.conj().T
    delta = target.omega_av - k * TWO_PI / seq.period
    g_z, g_a, g_b = _resonant_couplings(target, seq, k)
    U = np.zeros((4, 4), dtype=complex)
    if kind == "expected":
        U[np.ix_([0, 1], [0, 1])] = _two_level(delta / 2, g_z, t)
        U[np.ix_([2, 3], [2, 3])] = _two_level(delta / 2, -g_z, t)
    else:
        U[np.ix_([0, 3], [0, 3])] = _two_level(delta / 2, g_a, t)
        # state 1 sits at -delta/2, so order the pair as (2, 1)
        U[np.ix_([2, 1], [2, 1])] = _two_level(delta / 2, np.conj(g_b), t)
    return phase * U
