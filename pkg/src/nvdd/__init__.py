"""Finite-pulse dynamical decoupling of an NV center coupled to nuclear spins.

Floquet quasienergy analysis, closed-form expected and spurious coherence
dips, and exact stroboscopic propagation for periodic pi-pulse sequences.
"""

__version__ = "0.1.0"

from .analytic_coherence import (
    DipModel,
    MimicResult,
    analytic_trace,
    dip_envelope,
    dip_model,
    expected_coherence,
    mimic_analysis,
    optimal_pulse_number,
    spurious_coherence,
)
from .errors import (
    ClosedCrossingError,
    ConfigError,
    DegenerateTargetError,
    InvalidHarmonicError,
    NoDipError,
    NVDDError,
    SequenceError,
    TruncationError,
)
from .floquet import (
    CrossingGap,
    FloquetMatrix,
    FloquetSpectrum,
    build_floquet,
    converged_quasienergies,
    crossing_gap,
    effective_hamiltonian,
    quasienergies,
    quasienergy_scan,
    stroboscopic_propagator,
)
from .propagator import (
    CoherenceTrace,
    coherence_trace,
    global_phase_scan,
    one_period_unitary,
    pulse_number_scan,
    unitary_power,
)
from .pulses import (
    ModulationSpectrum,
    Pulse,
    PulseSequence,
    SequenceFamily,
    cpmg8,
    fourier_coefficient,
    fourier_coefficients,
    modulation_at,
    modulation_spectrum,
    periodic_sequence,
    xy4,
    xy8,
)
from .spin_model import (
    NuclearHamiltonians,
    SpinTarget,
    dip_period,
    from_hz,
    make_target,
    reduced_target,
    zeeman_hamiltonians,
)
