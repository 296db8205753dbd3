import numpy as np
import pytest

from nvdd import DipModel
from nvdd.dips import deepest_minima, dip_centroid, intervening_maximum, local_minima, registered_center


def test_minima_helpers():
    x = np.linspace(0, 10, 1001)
    L = 1 - 0.8 * np.exp(-((x - 3) ** 2) / 0.1) - 0.5 * np.exp(-((x - 7) ** 2) / 0.1)
    pos, val = deepest_minima(x, L, 2, prominence=0.05)
    assert pos == pytest.approx([3, 7], abs=0.011)
    assert len(local_minima(L, 0.6)) == 1
    assert intervening_maximum(x, L, 3, 7) == pytest.approx(1.0, abs=1e-3)
    assert dip_centroid(x, L, 3, 1) == pytest.approx(3, abs=1e-6)
    assert np.isnan(dip_centroid(x, np.ones_like(x), 3, 1))


def test_registration_recovers_shift():
    m = DipModel("expected", 4, 2e5, 0.0, 0.0, 2e-6, 2 * np.pi * 2e6)
    shift = 3.7e-10
    x = np.linspace(m.T_dip - 4 * m.W_T, m.T_dip + 4 * m.W_T, 3001)
    L = m.coherence(x - shift, 60)
    assert registered_center(x, L, m, 60, m.W_T / 2) == pytest.approx(m.T_dip + shift, abs=1e-14)
