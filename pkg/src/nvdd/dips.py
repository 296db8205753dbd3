"""Locating and characterizing dips in sampled coherence traces."""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.signal import find_peaks


def local_minima(L, prominence: float = 0.0) -> np.ndarray:
    """Indices of interior local minima of ``L`` with at least the given prominence."""
    idx, _ = find_peaks(-np.asarray(L, dtype=float), prominence=prominence if prominence > 0 else None)
    return idx


def deepest_minima(x, L, count: int, prominence: float = 0.0):
    """Positions and values of the ``count`` deepest local minima, sorted by position."""
    x, L = np.asarray(x), np.asarray(L)
    idx = local_minima(L, prominence)
    idx = idx[np.argsort(L[idx])][:count]
    idx = np.sort(idx)
    return x[idx], L[idx]


def dip_centroid(x, L, center: float, half_width: float) -> float:
    """Centroid of the missing coherence 1 - L over ``center ± half_width``."""
    x, L = np.asarray(x), np.asarray(L)
    sel = np.abs(x - center) <= half_width
    w = np.clip(1.0 - L[sel], 0.0, None)
    if w.sum() == 0:
        return float("nan")
    return float(np.sum(w * x[sel]) / w.sum())


def intervening_maximum(x, L, a: float, b: float) -> float:
    """Largest sample of L strictly between positions a and b."""
    x, L = np.asarray(x), np.asarray(L)
    lo, hi = min(a, b), max(a, b)
    sel = (x > lo) & (x < hi)
    return float(L[sel].max()) if sel.any() else float("nan")


def registered_center(x, L, model, n_p: int, max_shift: float, points: int = 801) -> float:
    """Dip centre from least-squares registration of a closed-form line shape.

    ``model.coherence(T, n_p)`` is shifted along T; the shift minimizing the
    squared residual against the sampled trace (grid search over
    ±``max_shift``, then bounded Brent refinement) gives the centre
    ``model.T_dip + shift``. Unlike a windowed centroid this is insensitive
    to the ragged sideband comb when n_p far exceeds N_p^max.
    """
    x, L = np.asarray(x, dtype=float), np.asarray(L, dtype=float)

    def cost(s):
        r = L - model.coherence(x - s, n_p)
        return float(np.dot(r, r))

    grid = np.linspace(-max_shift, max_shift, points)
    j = int(np.argmin([cost(s) for s in grid]))
    step = grid[1] - grid[0]
    res = minimize_scalar(cost, bounds=(grid[j] - step, grid[j] + step), method="bounded", options={"xatol": 1e-6 * step})
    return float(model.T_dip + res.x)
