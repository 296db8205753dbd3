import math

import numpy as np
import pytest

from nvdd import (
    ClosedCrossingError,
    InvalidHarmonicError,
    SequenceFamily,
    TruncationError,
    build_floquet,
    converged_quasienergies,
    crossing_gap,
    dip_model,
    dip_period,
    fourier_coefficient,
    from_hz,
    make_target,
    one_period_unitary,
    quasienergies,
    quasienergy_scan,
    reduced_target,
    stroboscopic_propagator,
)
from nvdd.floquet import default_truncation, fold
from nvdd.operators import nv_coherence

RABI = from_hz(20e6)
XY8 = SequenceFamily("xy8", RABI)
CPMG = SequenceFamily("cpmg8", RABI)
FIG1 = reduced_target(from_hz(2e6), from_hz(200e3))
FIG4 = make_target(from_hz(2e6), 1.0, from_hz(200e3), 0.0)


def nv_index(dim):
    # within each 4-block the NV index is the slow one (kron(NV, nucleus))
    return (np.arange(dim) % 4) // 2


def test_hermitian_and_block_structure():
    fm = build_floquet(FIG4, XY8.at(dip_period(FIG4, 3)))
    H = fm.matrix
    assert np.max(np.abs(H - H.conj().T)) < 1e-13 * FIG4.omega_av
    assert fm.dim == 4 * (2 * fm.truncation + 1)


def test_zero_coupling_is_diagonal():
    t = reduced_target(from_hz(2e6), 0.0)
    fm = build_floquet(t, XY8.at(1.3e-6))
    H = fm.matrix
    assert not np.any(H - np.diag(np.diag(H)))
    l = np.arange(-fm.truncation, fm.truncation + 1)
    expect = np.sort(np.concatenate([s * t.omega_av / 2 + l * fm.omega for s in (1, 1, -1, -1)]))
    assert np.allclose(np.sort(np.linalg.eigvalsh(H)), expect, rtol=0, atol=1e-9 * fm.omega)


def test_delta_pulses_have_no_cross_ms_blocks():
    H = build_floquet(FIG1, XY8.ideal().at(1.7e-6)).matrix
    n = nv_index(H.shape[0])
    assert not np.any(H[n[:, None] != n[None, :]])


def test_truncation_errors():
    seq = XY8.at(dip_period(FIG1, 20))
    with pytest.raises(TruncationError):
        build_floquet(FIG1, seq, truncation=10)
    with pytest.raises(TruncationError):
        build_floquet(FIG1, seq, truncation=30, max_harmonic=31)
    with pytest.raises(InvalidHarmonicError):
        crossing_gap(FIG1, XY8, 0)


@pytest.mark.parametrize("k", [2, 4, 7])
def test_truncation_convergence(k):
    seq = XY8.at(dip_period(FIG1, k) * (1 + 1e-3))
    _, L = converged_quasienergies(FIG1, seq, rtol=1e-7)
    a = quasienergies(build_floquet(FIG1, seq, L))
    b = quasienergies(build_floquet(FIG1, seq, L + 4))
    assert np.max(np.abs(fold(a - b, seq.omega))) < 1e-6 * FIG1.omega_av


def _eigenphase_quasienergies(target, seq):
    U = one_period_unitary(target, seq)
    return np.sort(fold(-np.angle(np.linalg.eigvals(U)) / seq.period, seq.omega))


@pytest.mark.parametrize("k,offset", [(2, 0.0), (2, 3e-3), (4, -1e-3), (5, 0.02)])
def test_floquet_monodromy_consistency(k, offset):
    seq = XY8.at(dip_period(FIG4, k) * (1 + offset))
    q, L = converged_quasienergies(FIG4, seq)
    e = _eigenphase_quasienergies(FIG4, seq)
    # match as sets on the circle
    d = np.abs(fold(q[:, None] - e[None, :], seq.omega)).min(axis=1)
    assert np.max(d) < 1e-8 * seq.omega


def test_default_truncation_is_only_approximate():
    seq = XY8.at(dip_period(FIG4, 2))
    q = quasienergies(build_floquet(FIG4, seq))
    e = _eigenphase_quasienergies(FIG4, seq)
    d = np.abs(fold(q[:, None] - e[None, :], seq.omega)).min(axis=1)
    assert np.max(d) < 1e-5 * seq.omega


@pytest.mark.parametrize("k", range(1, 8))
def test_gap_matches_coefficient_fig4(k):
    g = crossing_gap(FIG4, XY8, k)
    assert g.kind == ("expected" if k == 4 else "spurious")
    assert abs(g.gap - g.predicted_gap) / g.gap < 1e-2


_BOUNDARY_MISS = {3: "3.1% second-order shift of the gap", 5: "2.3% second-order shift of the gap"}


@pytest.mark.parametrize(
    "k",
    [pytest.param(k, marks=pytest.mark.xfail(strict=True, reason=_BOUNDARY_MISS[k])) if k in _BOUNDARY_MISS else k
     for k in range(1, 8)],
)
def test_gap_matches_coefficient_at_weak_coupling_boundary(k):
    # A_perp = omega_av / 10 is the edge of the weak-coupling regime
    g = crossing_gap(FIG1, XY8, k)
    assert abs(g.gap - g.predicted_gap) / g.gap < 1e-2


def test_delta_pulse_gaps():
    g2 = crossing_gap(FIG1, XY8.ideal(), 2)
    assert g2.kind == "closed" and g2.predicted_gap == 0.0
    assert g2.gap < 1e-6 * FIG1.omega_av
    g4 = crossing_gap(FIG1, XY8.ideal(), 4)
    f4 = abs(fourier_coefficient(XY8.ideal().at(g4.T_dip), "z", 4))
    assert g4.gap == pytest.approx(abs(FIG1.A_perp) * f4, rel=1e-2)


def test_finite_pulse_k2_gap_and_ratio():
    g2, g4 = crossing_gap(FIG4, XY8, 2), crossing_gap(FIG4, XY8, 4)
    assert g2.gap > 0 and g2.predicted_gap > 0
    assert 14 <= g4.scaled_gap / g2.scaled_gap <= 26


def test_cpmg_coincidence():
    g = crossing_gap(FIG1, CPMG, 4)
    assert g.kind == "expected" and g.coincidence
    assert crossing_gap(FIG1, CPMG, 2).kind == "closed"


def test_zero_coupling_scan_lines():
    t = reduced_target(from_hz(2e6), 0.0)
    Ts = np.linspace(0.6e-6, 1.4e-6, 200)
    tr = quasienergy_scan(t, XY8, Ts).tracked()
    assert np.max(np.abs(np.diff(tr, axis=0))) < 0.1 * t.omega_av
    for j in range(4):
        eT = tr[:, j] * Ts
        ok = False
        for s in (1, -1):
            l = (eT - s * t.omega_av * Ts / 2) / (2 * math.pi)
            ok |= np.allclose(l, np.round(l[0]), atol=1e-9)
        assert ok


def test_stroboscopic_unitary_and_identity():
    seq = XY8.at(dip_period(FIG4, 2))
    U0 = stroboscopic_propagator(FIG4, seq, 2, 0)
    assert np.allclose(U0 / U0[0, 0], np.eye(4), atol=1e-14)
    for n in (1, 17, 1000):
        U = stroboscopic_propagator(FIG4, seq, 2, n)
        assert np.max(np.abs(U.conj().T @ U - np.eye(4))) < 1e-12


def test_stroboscopic_full_transfer():
    seq = XY8.at(dip_period(FIG4, 2))
    m = dip_model(FIG4, seq, 2)
    U = stroboscopic_propagator(FIG4, seq, 2, m.N_p_max)
    # (+, up) <-> (-, down)
    assert abs(U[3, 0]) == pytest.approx(1.0, abs=1e-12)


def test_stroboscopic_closed_crossing():
    with pytest.raises(ClosedCrossingError):
        stroboscopic_propagator(FIG1, XY8.ideal().at(dip_period(FIG1, 2)), 2, 10)


@pytest.mark.parametrize("k,phi_g", [(2, 0.0), (2, -math.pi / 4), (3, 0.4), (4, 0.0), (4, 1.0)])
@pytest.mark.parametrize("rel", [0.0, 2e-3, -5e-3])
def test_stroboscopic_coherence_matches_closed_form(k, phi_g, rel):
    seq = XY8.with_global_phase(phi_g).at(dip_period(FIG4, k) * (1 + rel))
    m = dip_model(FIG4, seq, k)
    for n in (1, 13, 60, 211):
        L = nv_coherence(stroboscopic_propagator(FIG4, seq, k, n))
        assert L == pytest.approx(float(m.coherence(seq.period, n)), abs=1e-12)


def test_cpmg_stroboscopic_uses_coincident_couplings():
    seq = CPMG.at(dip_period(FIG1, 4))
    U = stroboscopic_propagator(FIG1, seq, 4, 5)
    assert np.max(np.abs(U.conj().T @ U - np.eye(4))) < 1e-12
