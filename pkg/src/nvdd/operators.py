"""Spin operators and the NV readout convention shared by all propagators.

Two-qubit ordering is NV ⊗ nucleus. The NV qubit is ordered (m_s = 1, m_s = 0)
so that the NV Pauli-z is diag(+1, -1) and the conditioned nuclear
Hamiltonian reads I ⊗ H_av + sigma_z ⊗ V.
"""

import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

I_X = SIGMA_X / 2
I_Y = SIGMA_Y / 2
I_Z = SIGMA_Z / 2

PAULIS = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}

# NV spin-x readout and the initial state (|+x><+x| on the NV, maximally mixed nucleus)
S_X_NV = np.kron(SIGMA_X / 2, IDENTITY_2)
RHO_0 = np.kron((IDENTITY_2 + SIGMA_X) / 2, IDENTITY_2) / 2

# Tr[S_x rho_0] = 1/2 for identity evolution; L is normalized so that this maps to 1.
COHERENCE_NORM = 1.0 / np.trace(S_X_NV @ RHO_0).real


def nv_coherence(U):
    """Normalized NV coherence c * Tr[S_x U rho_0 U^dagger] for a 4x4 unitary (or a stack)."""
    U = np.asarray(U)
    rho = U @ RHO_0 @ np.conj(np.swapaxes(U, -1, -2))
    return COHERENCE_NORM * np.real(np.einsum("ij,...ji->...", S_X_NV, rho))
