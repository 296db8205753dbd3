"""Nuclear gyromagnetic ratios for the spin-1/2 isotopes used in mimic analysis.

External reference data (not derived in this package): gamma / 2 pi in MHz/T,
sign retained, from the standard NMR tables (IUPAC recommendations, Harris et
al. 2001, and the CODATA proton value). Quadrupolar 14N is listed for
completeness; the spin-1/2 model does not describe it faithfully.
"""

from __future__ import annotations

from .errors import NVDDError
from .spin_model import TWO_PI

GAMMA_MHZ_PER_T = {
    "H1": 42.57747892,
    "C13": 10.7084,
    "N14": 3.077,
    "N15": -4.316,
    "Si29": -8.465,
    "P31": 17.235,
}

_ALIASES = {"1H": "H1", "13C": "C13", "14N": "N14", "15N": "N15", "29SI": "Si29", "31P": "P31"}


def canonical_name(name: str) -> str:
    key = name.strip()
    for known in GAMMA_MHZ_PER_T:
        if key.upper() == known.upper():
            return known
    try:
        return _ALIASES[key.upper()]
    except KeyError:
        raise NVDDError(f"unknown isotope {name!r}; known: {sorted(GAMMA_MHZ_PER_T)}") from None


def gyromagnetic_ratio(name: str) -> float:
    """Angular gyromagnetic ratio in rad s^-1 T^-1."""
    return TWO_PI * 1e6 * GAMMA_MHZ_PER_T[canonical_name(name)]
