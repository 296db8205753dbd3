import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nvdd import (
    DipModel,
    NoDipError,
    NVDDError,
    SequenceFamily,
    analytic_trace,
    dip_envelope,
    dip_model,
    dip_period,
    expected_coherence,
    from_hz,
    global_phase_scan,
    make_target,
    mimic_analysis,
    optimal_pulse_number,
    pulse_number_scan,
    reduced_target,
    spurious_coherence,
)

RABI = from_hz(20e6)
XY8 = SequenceFamily("xy8", RABI)
FIG1 = reduced_target(from_hz(2e6), from_hz(200e3))
FIG4 = make_target(from_hz(2e6), 1.0, from_hz(200e3), 0.0)
WEAK = reduced_target(from_hz(2e6), from_hz(20e3))

models = st.builds(
    DipModel,
    kind=st.sampled_from(["expected", "spurious"]),
    k=st.integers(1, 20),
    coupling=st.floats(1e2, 1e6),
    phase=st.floats(-math.pi, math.pi),
    global_phase=st.floats(-math.pi, math.pi),
    T_dip=st.just(1e-6),
    omega_av=st.just(2 * math.pi * 1e6),
)


@given(models, st.floats(0.9e-6, 1.1e-6), st.integers(0, 10_000))
def test_coherence_bounded(m, T, n):
    m = DipModel(m.kind, m.k, m.coupling, m.phase, m.global_phase, m.k * 2 * math.pi / m.omega_av, m.omega_av)
    L = float(m.coherence(T * m.k, n))
    assert -1 - 1e-15 <= L <= 1 + 1e-15
    assert L >= float(m.envelope(T * m.k)) - 1e-12


def test_shared_kernel():
    args = dict(k=3, coupling=1234.5, phase=0.0, global_phase=0.0, T_dip=1.5e-6, omega_av=2 * math.pi * 2e6)
    e = DipModel("expected", **args)
    s = DipModel("spurious", **args)
    T = np.linspace(1.49e-6, 1.51e-6, 301)
    for n in (1, 7, 60):
        assert np.array_equal(e.coherence(T, n), s.coherence(T, n))


def test_epsilon_and_derived_quantities():
    m = dip_model(FIG4, XY8, 2)
    assert float(m.epsilon(m.T_dip)) == pytest.approx(m.coupling / 2, rel=1e-12)
    assert m.N_p_max == pytest.approx(math.pi / (m.coupling * m.T_dip), rel=1e-15)
    assert m.W_T == pytest.approx(2 * m.coupling * m.T_dip / m.omega_av, rel=1e-15)
    n, n_int = optimal_pulse_number(FIG4, XY8, 2)
    assert n == m.N_p_max and n_int == round(n)


def test_detuning_symmetry():
    m = dip_model(FIG4, XY8, 2)
    for delta in np.linspace(-3, 3, 13) * m.coupling:
        Tp = 2 * math.pi * m.k / (m.omega_av - delta)
        Tm = 2 * math.pi * m.k / (m.omega_av + delta)
        assert float(m.epsilon(Tp)) == pytest.approx(float(m.epsilon(Tm)), rel=1e-12)
        assert float(m.envelope(Tp)) == pytest.approx(float(m.envelope(Tm)), abs=1e-12)
        # the explicit T in sin^2(N_p eps T) breaks exact symmetry only at O(delta / omega_av)
        for n in (10, 60):
            bound = 2 * n * float(m.epsilon(Tp)) * abs(Tp - Tm)
            assert abs(float(m.coherence(Tp, n) - m.coherence(Tm, n))) <= bound + 1e-12


def test_far_detuned_is_flat():
    m = dip_model(FIG4, XY8, 2)
    assert float(m.coherence(m.T_dip * 1.05, 60)) > 0.999


def test_full_contrast_points():
    m = dip_model(FIG4, XY8, 4)
    n_half = math.pi / 2 / (float(m.epsilon(m.T_dip)) * m.T_dip)
    assert float(m.coherence(m.T_dip, n_half)) == pytest.approx(-1.0, abs=1e-12)
    s = dip_model(FIG4, XY8, 2)
    s = DipModel(s.kind, s.k, s.coupling, s.phase, -s.phase, s.T_dip, s.omega_av)
    assert float(s.coherence(s.T_dip, s.N_p_max)) == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 5, 6, 7])
def test_suppression_identity(k):
    m0 = dip_model(FIG4, XY8, k)
    fam = XY8.with_global_phase(-m0.phase + math.pi / 2)
    T = np.linspace(m0.T_dip * 0.9, m0.T_dip * 1.1, 20001)
    for n in (1, 60, round(m0.N_p_max), 5000):
        assert np.max(np.abs(1 - spurious_coherence(FIG4, fam, k, n, T))) < 1e-12


@pytest.mark.parametrize("k", [1, 2, 3, 5, 6, 7])
def test_xy8_spurious_never_negative(k):
    m = dip_model(FIG4, XY8, k)
    assert m.contrast == pytest.approx(0.5, abs=1e-12)
    T = np.linspace(m.T_dip - m.W_T, m.T_dip + m.W_T, 2001)
    L = np.min([m.coherence(T, n).min() for n in range(1, 200)])
    assert L >= -1e-12 and L < 0.01


def test_envelope():
    m = dip_model(FIG4, XY8.with_global_phase(0.3), 2)
    assert float(m.envelope(m.T_dip)) == pytest.approx(-math.cos(2 * (m.phase + 0.3)), abs=1e-12)
    # half-width detuning: bracket = 1/2
    T_half = 2 * math.pi * m.k / (m.omega_av - m.coupling)
    assert float(m._weight(T_half)) == pytest.approx(0.5, rel=1e-12)
    rng = np.random.default_rng(3)
    T = m.T_dip + m.W_T * rng.uniform(-3, 3, 200)
    n = rng.integers(1, 500, 200)
    assert np.all(m.coherence(T, n) >= m.envelope(T) - 1e-12)
    assert np.array_equal(dip_envelope(FIG4, XY8.with_global_phase(0.3), 2, T), m.envelope(T))


def test_pulse_number_scaling():
    m = dip_model(FIG4, XY8, 2)
    doubled = DipModel(m.kind, m.k, 2 * m.coupling, m.phase, 0.0, m.T_dip, m.omega_av)
    assert doubled.N_p_max == pytest.approx(m.N_p_max / 2, rel=1e-15)
    twice_T = DipModel(m.kind, 2 * m.k, m.coupling, m.phase, 0.0, 2 * m.T_dip, m.omega_av)
    assert twice_T.N_p_max == pytest.approx(m.N_p_max / 2, rel=1e-15)
    stronger = reduced_target(FIG1.omega_av, 2 * FIG1.A_perp)
    assert optimal_pulse_number(stronger, XY8, 2)[0] == pytest.approx(optimal_pulse_number(FIG1, XY8, 2)[0] / 2, rel=1e-12)


def test_no_dip_errors():
    with pytest.raises(NoDipError):
        dip_model(FIG4, XY8, 4, "spurious")  # f_perp^4 = 0 for XY8
    with pytest.raises(NoDipError):
        expected_coherence(FIG4, XY8, 2, 10, 1e-6)
    with pytest.raises(NoDipError):
        spurious_coherence(FIG4, XY8.ideal(), 2, 10, 1e-6)
    with pytest.raises(NoDipError):
        optimal_pulse_number(reduced_target(FIG4.omega_av, 0.0), XY8, 2)
    with pytest.raises(NVDDError):
        dip_model(FIG4, XY8, 2, "sideways")


def test_validity_flag_and_trace():
    m = dip_model(FIG4, XY8, 2)
    T = np.array([m.T_dip, 2 * math.pi * 2 / (m.omega_av - 11 * m.coupling)])
    tr = analytic_trace(FIG4, XY8, 2, 60, T)
    assert tr.method == "analytic-spurious" and tr.params["valid"] == [True, False]


# exact-propagator oracles


def test_full_contrast_pulse_number_matches_exact():
    m = dip_model(FIG1, XY8, 2)
    tr = pulse_number_scan(FIG1, XY8.with_global_phase(-m.phase), 2, range(0, 101))
    assert tr.L[0] == pytest.approx(1.0, abs=1e-12)
    assert abs(tr.x[np.argmin(tr.L)] - m.N_p_max) <= 1


def test_weak_coupling_pulse_number_trace():
    m = dip_model(WEAK, XY8, 2)
    n = np.arange(0, int(3 * m.N_p_max))
    exact = pulse_number_scan(WEAK, XY8.with_global_phase(-m.phase), 2, n).L
    closed = 1 - 2 * np.sin(n * 0.5 * m.coupling * m.T_dip) ** 2
    assert np.max(np.abs(exact - closed)) < 0.02


def test_expected_first_minimum():
    m = dip_model(WEAK, XY8, 4)
    n = np.arange(0, int(2 * m.N_p_max))
    tr = pulse_number_scan(WEAK, XY8, 4, n)
    first = tr.x[np.argmin(tr.L[: int(1.5 * m.N_p_max)])]
    assert abs(first - m.N_p_max) <= 1


def test_global_phase_enters_through_contrast_only():
    # open question: phi_g acts only through cos^2(phi_perp + phi_g); checked on the exact oracle
    m = dip_model(WEAK, XY8, 2)
    n = round(m.N_p_max)
    phases = np.linspace(-math.pi / 2, math.pi / 2, 25)
    exact = global_phase_scan(WEAK, XY8, m.T_dip, n, phases).L
    closed = [float(dip_model(WEAK, XY8.with_global_phase(g), 2).coherence(m.T_dip, n)) for g in phases]
    assert np.max(np.abs(exact - closed)) < 0.02


# isotope mimics


@pytest.mark.parametrize(
    "primary,mimic,harmonic,k,phi_g",
    [
        ("H1", "C13", Fraction(4), 1, -math.pi / 4),
        ("Si29", "C13", Fraction(4, 5), 5, -math.pi / 4),
        ("P31", "H1", Fraction(2, 5), 10, math.pi / 4),
    ],
)
def test_table_rows(primary, mimic, harmonic, k, phi_g):
    r = mimic_analysis(primary, mimic, 0.1, XY8)
    assert r.found and r.harmonic == harmonic and r.k == k
    assert r.global_phase == pytest.approx(phi_g, abs=1e-12)


def test_no_mimic():
    r = mimic_analysis("H1", "N15", 0.1, XY8)
    assert not r.found and r.k is None
    with pytest.raises(NVDDError):
        mimic_analysis("H1", "Xe129", 0.1, XY8)
